// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#include "amodal/scene_fixture.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "amodal/util.hpp"

namespace amodal {

namespace {

using nlohmann::json;

BinaryMask rasterize_shapes(const json& shapes, int width, int height) {
    BinaryMask mask(width, height);
    for (const auto& shape : shapes) {
        const std::string type = shape.at("type").get<std::string>();
        if (type == "rect") {
            const int x = shape.at("x").get<int>();
            const int y = shape.at("y").get<int>();
            const int w = shape.at("w").get<int>();
            const int h = shape.at("h").get<int>();
            for (int yy = std::max(0, y); yy < std::min(height, y + h); ++yy)
                for (int xx = std::max(0, x); xx < std::min(width, x + w); ++xx)
                    mask.set(xx, yy);
        } else if (type == "circle") {
            const int cx = shape.at("cx").get<int>();
            const int cy = shape.at("cy").get<int>();
            const int r = shape.at("r").get<int>();
            for (int yy = std::max(0, cy - r); yy <= std::min(height - 1, cy + r); ++yy)
                for (int xx = std::max(0, cx - r); xx <= std::min(width - 1, cx + r); ++xx)
                    if ((xx - cx) * (xx - cx) + (yy - cy) * (yy - cy) <= r * r) mask.set(xx, yy);
        } else {
            throw Error(ErrorKind::BadFixture, "unknown shape type: " + type);
        }
    }
    return mask;
}

Rgb parse_color(const json& value) {
    if (!value.is_array() || value.size() != 3)
        throw Error(ErrorKind::BadFixture, "color must be [r,g,b]");
    return {value[0].get<std::uint8_t>(), value[1].get<std::uint8_t>(), value[2].get<std::uint8_t>()};
}

}  // namespace

SceneFixture SceneFixture::load(const std::string& path) {
    return from_json_text(read_text_file(path));
}

SceneFixture SceneFixture::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::BadFixture, std::string("fixture json: ") + e.what());
    }
    SceneFixture fx;
    try {
        fx.name = doc.value("name", "fixture");
        fx.frame_width = doc.at("canvas").at("width").get<int>();
        fx.frame_height = doc.at("canvas").at("height").get<int>();
        if (doc.contains("background")) fx.background = parse_color(doc["background"]);
        if (doc.contains("expansion")) {
            const auto& e = doc["expansion"];
            fx.scripted_expansion = {e.value("top", 0.0), e.value("bottom", 0.0),
                                     e.value("left", 0.0), e.value("right", 0.0)};
        }
        fx.target_id = doc.at("target").get<std::string>();

        const int ww = fx.world_width();
        const int wh = fx.world_height();
        for (const auto& obj : doc.at("objects")) {
            Object o;
            o.id = obj.at("id").get<std::string>();
            o.label = obj.at("label").get<std::string>();
            o.z = obj.at("z").get<int>();
            o.fill = parse_color(obj.at("fill"));
            o.amodal = rasterize_shapes(obj.at("shapes"), ww, wh);
            fx.objects.push_back(std::move(o));
        }
        if (doc.contains("hypotheses")) {
            for (const auto& h : doc["hypotheses"]) {
                ScriptedHypothesis sh;
                sh.description = h.at("description").get<std::string>();
                sh.weight = h.at("weight").get<double>();
                if (h.contains("variant_shapes"))
                    sh.variant_amodal = rasterize_shapes(h["variant_shapes"], ww, wh);
                fx.hypotheses.push_back(std::move(sh));
            }
        }
        if (doc.contains("stage1_omissions"))
            fx.stage1_omissions = doc["stage1_omissions"].get<std::vector<std::string>>();
        const std::string grounding = doc.value("grounding", "ok");
        if (grounding == "ok") fx.grounding = Grounding::Ok;
        else if (grounding == "fail_once") fx.grounding = Grounding::FailOnce;
        else if (grounding == "fail_always") fx.grounding = Grounding::FailAlways;
        else throw Error(ErrorKind::BadFixture, "grounding must be ok|fail_once|fail_always");
        fx.seed_tint_amplitude = doc.value("seed_tint_amplitude", 0);
        if (doc.contains("judge")) {
            const auto& j = doc["judge"];
            if (j.contains("complete"))
                for (int i = 0; i < 3; ++i) fx.judge.complete_scores[i] = j["complete"][i].get<int>();
            if (j.contains("incomplete"))
                for (int i = 0; i < 3; ++i) fx.judge.incomplete_scores[i] = j["incomplete"][i].get<int>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::BadFixture, std::string("fixture json: ") + e.what());
    }
    fx.validate();
    return fx;
}

void SceneFixture::validate() const {
    if (frame_width < 1 || frame_height < 1)
        throw Error(ErrorKind::BadFixture, "frame dimensions must be >= 1");
    scripted_expansion.validate(2.0);
    std::set<int> zs;
    std::set<std::string> ids;
    bool target_found = false;
    for (const auto& o : objects) {
        if (!zs.insert(o.z).second)
            throw Error(ErrorKind::BadFixture, "duplicate z rank " + std::to_string(o.z));
        if (!ids.insert(o.id).second)
            throw Error(ErrorKind::BadFixture, "duplicate object id " + o.id);
        if (o.fill == kWhite)
            throw Error(ErrorKind::BadFixture, "object fill must differ from pure white: " + o.id);
        if (o.amodal.width() != world_width() || o.amodal.height() != world_height())
            throw Error(ErrorKind::BadFixture, "object mask dims must equal world dims: " + o.id);
        if (o.id == target_id) target_found = true;
    }
    if (!target_found) throw Error(ErrorKind::BadFixture, "target_id not present: " + target_id);
    if (hypotheses.empty())
        throw Error(ErrorKind::BadFixture, "fixture needs at least one scripted hypothesis");
    for (const auto& h : hypotheses) {
        if (h.description.empty()) throw Error(ErrorKind::BadFixture, "empty hypothesis description");
        if (!(h.weight > 0)) throw Error(ErrorKind::BadFixture, "hypothesis weight must be > 0");
        if (h.variant_amodal &&
            (h.variant_amodal->width() != world_width() || h.variant_amodal->height() != world_height()))
            throw Error(ErrorKind::BadFixture, "variant mask dims must equal world dims");
    }
    const BinaryMask target_visible = intersect_masks(visible_world(target_id), frame_rect_world());
    for (const auto& h : hypotheses) {
        if (h.variant_amodal && !contains(*h.variant_amodal, target_visible))
            throw Error(ErrorKind::BadFixture,
                        "variant mask must contain the visible target region");
    }
    for (const auto& omitted : stage1_omissions) {
        if (!ids.count(omitted))
            throw Error(ErrorKind::BadFixture, "omitted occluder not in scene: " + omitted);
        if (!visible_frame(omitted).any())
            throw Error(ErrorKind::BadFixture,
                        "omitted occluder has no visible pixels to detect: " + omitted);
    }
}

int SceneFixture::world_width() const {
    return frame_width + static_cast<int>(std::lround(scripted_expansion.left * frame_width)) +
           static_cast<int>(std::lround(scripted_expansion.right * frame_width));
}

int SceneFixture::world_height() const {
    return frame_height + static_cast<int>(std::lround(scripted_expansion.top * frame_height)) +
           static_cast<int>(std::lround(scripted_expansion.bottom * frame_height));
}

int SceneFixture::offset_x() const {
    return static_cast<int>(std::lround(scripted_expansion.left * frame_width));
}

int SceneFixture::offset_y() const {
    return static_cast<int>(std::lround(scripted_expansion.top * frame_height));
}

const SceneFixture::Object& SceneFixture::object(const std::string& id) const {
    for (const auto& o : objects)
        if (o.id == id) return o;
    throw Error(ErrorKind::BadFixture, "no such object: " + id);
}

const SceneFixture::Object* SceneFixture::find_by_label(const std::string& label) const {
    const std::string needle = to_lower(label);
    for (const auto& o : objects)
        if (to_lower(o.label) == needle || to_lower(o.id) == needle) return &o;
    return nullptr;
}

BinaryMask SceneFixture::visible_world(const std::string& id) const {
    const Object& self = object(id);
    BinaryMask visible = self.amodal;
    for (const auto& o : objects) {
        if (o.z < self.z) visible = difference(visible, o.amodal);
    }
    return visible;
}

BinaryMask SceneFixture::frame_rect_world() const {
    BinaryMask rect(world_width(), world_height());
    for (int y = 0; y < frame_height; ++y)
        for (int x = 0; x < frame_width; ++x) rect.set(x + offset_x(), y + offset_y());
    return rect;
}

BinaryMask SceneFixture::visible_frame(const std::string& id) const {
    const BinaryMask world = visible_world(id);
    BinaryMask frame(frame_width, frame_height);
    for (int y = 0; y < frame_height; ++y)
        for (int x = 0; x < frame_width; ++x)
            if (world.at(x + offset_x(), y + offset_y())) frame.set(x, y);
    return frame;
}

BinaryMask SceneFixture::hidden_target_world() const {
    const BinaryMask in_frame_visible =
        intersect_masks(visible_world(target_id), frame_rect_world());
    return difference(target().amodal, in_frame_visible);
}

std::vector<const SceneFixture::Object*> SceneFixture::occluders_of_target() const {
    std::vector<const Object*> result;
    const Object& t = target();
    const BinaryMask frame = frame_rect_world();
    for (const auto& o : objects) {
        if (o.z >= t.z) continue;
        if (intersect_masks(intersect_masks(o.amodal, t.amodal), frame).any())
            result.push_back(&o);
    }
    return result;
}

Image SceneFixture::render_world() const {
    Image img(world_width(), world_height(), background);
    std::vector<const Object*> order;
    for (const auto& o : objects) order.push_back(&o);
    // far to near so nearer objects paint over
    std::sort(order.begin(), order.end(), [](const Object* a, const Object* b) { return a->z > b->z; });
    for (const Object* o : order)
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x)
                if (o->amodal.at(x, y)) img.set(x, y, o->fill);
    return img;
}

Image SceneFixture::render_observed() const {
    const Image world = render_world();
    Image frame(frame_width, frame_height);
    for (int y = 0; y < frame_height; ++y)
        for (int x = 0; x < frame_width; ++x)
            frame.set(x, y, world.at(x + offset_x(), y + offset_y()));
    return frame;
}

const BinaryMask& SceneFixture::target_amodal_variant(int hypothesis_index) const {
    if (hypothesis_index >= 0 && hypothesis_index < static_cast<int>(hypotheses.size()) &&
        hypotheses[hypothesis_index].variant_amodal)
        return *hypotheses[hypothesis_index].variant_amodal;
    return target().amodal;
}

Rgb SceneFixture::tinted_fill(std::uint64_t seed) const {
    const Rgb fill = target().fill;
    if (seed_tint_amplitude == 0) return fill;
    const std::uint64_t h = mix64(seed);
    const int span = 2 * seed_tint_amplitude + 1;
    auto shift = [&](int lane, std::uint8_t base) {
        const int delta = static_cast<int>((h >> (8 * lane)) % span) - seed_tint_amplitude;
        const int v = std::clamp(static_cast<int>(base) + delta, 0, 254);  // never pure white
        return static_cast<std::uint8_t>(v);
    };
    return {shift(0, fill.r), shift(1, fill.g), shift(2, fill.b)};
}

Image SceneFixture::render_expected_completion(int hypothesis_index, std::uint64_t seed) const {
    const BinaryMask& amodal = target_amodal_variant(hypothesis_index);
    const BinaryMask visible = intersect_masks(visible_world(target_id), frame_rect_world());
    const Rgb tinted = tinted_fill(seed);
    Image out(world_width(), world_height(), kWhite);
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            if (visible.at(x, y))
                out.set(x, y, target().fill);
            else if (amodal.at(x, y))
                out.set(x, y, tinted);
        }
    }
    return out;
}

}  // namespace amodal
