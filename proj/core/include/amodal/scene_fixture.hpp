// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "amodal/mask_ops.hpp"
#include "amodal/types.hpp"

namespace amodal {

/// Synthetic ground-truth scene: z-ordered solid-color objects with full
/// (amodal) masks authored on a "world" canvas that equals the observed frame
/// expanded by the scripted per-side ratios. The observed image is the world
/// render cropped to the frame, so border truncation falls out naturally.
class SceneFixture {
public:
    struct Object {
        std::string id;
        std::string label;
        BinaryMask amodal;  // world coords
        int z = 0;          // lower z is nearer to the camera
        Rgb fill;
    };

    struct ScriptedHypothesis {
        std::string description;
        double weight = 0.0;
        std::optional<BinaryMask> variant_amodal;  // world coords; target shape for this reading
    };

    enum class Grounding { Ok, FailOnce, FailAlways };

    struct JudgeScript {
        std::array<int, 3> complete_scores{4, 4, 2};    // structural, semantic, realism
        std::array<int, 3> incomplete_scores{1, 2, 0};
    };

    std::string name;
    int frame_width = 0;
    int frame_height = 0;
    Rgb background{200, 200, 200};
    std::vector<Object> objects;
    std::string target_id;
    Expansion scripted_expansion;
    std::vector<ScriptedHypothesis> hypotheses;
    std::vector<std::string> stage1_omissions;  // occluder ids the occlusion mock misses
    Grounding grounding = Grounding::Ok;
    int seed_tint_amplitude = 0;  // per-seed tint of synthesized pixels, 0 = exact fill
    JudgeScript judge;

    static SceneFixture load(const std::string& path);
    static SceneFixture from_json_text(const std::string& text);

    /// Throws BadFixture on any invariant violation.
    void validate() const;

    int world_width() const;
    int world_height() const;
    int offset_x() const;  // frame origin inside the world canvas
    int offset_y() const;

    const Object& object(const std::string& id) const;
    const Object& target() const { return object(target_id); }
    const Object* find_by_label(const std::string& label) const;

    /// Amodal mask minus the union of strictly nearer objects (world coords).
    BinaryMask visible_world(const std::string& id) const;

    /// World-coords mask of the observed frame rectangle.
    BinaryMask frame_rect_world() const;

    /// Visible mask cropped to the observed frame (frame coords).
    BinaryMask visible_frame(const std::string& id) const;

    /// Target pixels invisible in the observed image: occluded or out of frame.
    BinaryMask hidden_target_world() const;

    /// Nearer objects that cover target pixels inside the frame.
    std::vector<const Object*> occluders_of_target() const;

    Image render_world() const;
    Image render_observed() const;

    /// Target amodal mask for a hypothesis variant (world coords);
    /// index -1 or a variant without its own shape falls back to the base mask.
    const BinaryMask& target_amodal_variant(int hypothesis_index) const;

    Rgb tinted_fill(std::uint64_t seed) const;

    /// The image the mock pipeline must produce for this scene: white canvas,
    /// visible target pixels in the plain fill, synthesized pixels in the
    /// seed-tinted fill. Valid for runs that use the scripted expansion.
    Image render_expected_completion(int hypothesis_index, std::uint64_t seed) const;
};

}  // namespace amodal
