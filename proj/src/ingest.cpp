#include "zoomsig/ingest.hpp"

#include "zoomsig/error.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace zoomsig {

namespace {

using nlohmann::json;

constexpr double kFinalTolerance = 1e-6;

// Line-level rejection; turned into a dropped diagnostic by parse_log.
struct LineError {
    std::string message;
};

double number_at(const json& v, const char* what) {
    if (!v.is_number()) throw LineError{std::string(what) + " must be a number"};
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw LineError{std::string(what) + " must be finite"};
    return d;
}

std::optional<json> field(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    return *it;
}

const json& required(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) throw LineError{std::string("missing field '") + key + "'"};
    return *it;
}

std::string string_at(const json& obj, const char* key) {
    const json& v = required(obj, key);
    if (!v.is_string()) throw LineError{std::string("'") + key + "' must be a string"};
    return v.get<std::string>();
}

std::optional<Point> point_at(const json& obj, const char* key) {
    auto v = field(obj, key);
    if (!v) return std::nullopt;
    if (!v->is_array() || v->size() != 2) throw LineError{std::string("'") + key + "' must be [x, y] or null"};
    return Point{number_at((*v)[0], key), number_at((*v)[1], key)};
}

std::optional<BBox> box_at(const json& obj, const char* key) {
    auto v = field(obj, key);
    if (!v) return std::nullopt;
    if (!v->is_array() || v->size() != 4) {
        throw LineError{std::string("'") + key + "' must be [x0, y0, x1, y1] or null"};
    }
    return BBox{number_at((*v)[0], key), number_at((*v)[1], key), number_at((*v)[2], key),
                number_at((*v)[3], key)};
}

bool on_canvas(Point p) { return p.x >= 0.0 && p.x <= kCanvas && p.y >= 0.0 && p.y <= kCanvas; }

json point_json(const std::optional<Point>& p) {
    if (!p) return nullptr;
    return json::array({p->x, p->y});
}

json box_json(const std::optional<BBox>& b) {
    if (!b) return nullptr;
    return json::array({b->x0, b->y0, b->x1, b->y1});
}

LogRecord parse_record(const std::string& line, std::vector<std::string>& warnings) {
    const json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded()) throw LineError{"not valid JSON"};
    if (!obj.is_object()) throw LineError{"line is not a JSON object"};

    LogRecord rec;
    rec.sample_id = string_at(obj, "sample_id");
    rec.model = string_at(obj, "model");
    rec.r = number_at(required(obj, "r"), "r");
    if (rec.r <= 0.0 || rec.r > 1.0) throw LineError{"r must lie in (0, 1]"};
    rec.category = string_at(obj, "category");
    rec.os = string_at(obj, "os");
    rec.application = string_at(obj, "application");

    const auto gt = box_at(obj, "gt_bbox");
    if (!gt) throw LineError{"missing field 'gt_bbox'"};
    if (gt->x0 > gt->x1 || gt->y0 > gt->y1 || !on_canvas({gt->x0, gt->y0}) || !on_canvas({gt->x1, gt->y1})) {
        throw LineError{"gt_bbox must satisfy x0 <= x1, y0 <= y1 inside [0, 1000]^2"};
    }
    rec.gt_bbox = *gt;

    rec.p1 = point_at(obj, "p1");
    rec.p2 = point_at(obj, "p2");
    rec.crop_box = box_at(obj, "crop_box");
    rec.final_point = point_at(obj, "final");

    if (auto stage = field(obj, "parse_failed_stage")) {
        if (*stage == 1) {
            rec.parse_failed_stage = ParseStage::Step1;
        } else if (*stage == 2) {
            rec.parse_failed_stage = ParseStage::Step2;
        } else {
            throw LineError{"parse_failed_stage must be 1, 2 or null"};
        }
    }

    switch (rec.parse_failed_stage) {
        case ParseStage::Step1:
            if (rec.p1 || rec.p2) throw LineError{"parse_failed_stage 1 requires p1 and p2 to be null"};
            break;
        case ParseStage::Step2:
            if (!rec.p1 || rec.p2) throw LineError{"parse_failed_stage 2 requires p1 present and p2 null"};
            break;
        case ParseStage::None:
            if (rec.p2 && !rec.p1) throw LineError{"p2 present without p1"};
            if (!rec.p2) {
                rec.parse_failed_stage = rec.p1 ? ParseStage::Step2 : ParseStage::Step1;
                warnings.emplace_back("p2 is null without parse_failed_stage; treated as a step-" +
                                      std::string(rec.p1 ? "2" : "1") + " failure");
            }
            break;
    }

    if (rec.p1 && !rec.crop_box) {
        rec.crop_box = make_crop(*rec.p1, rec.r).box;
    }
    if (rec.crop_box) {
        try {
            (void)crop_from_corners(*rec.crop_box, rec.r, rec.p1);
        } catch (const Error& e) {
            throw LineError{e.what()};
        }
    }

    if (rec.final_point && !rec.p2) {
        warnings.emplace_back("final present without p2; ignored");
        rec.final_point.reset();
    }
    if (rec.final_point && rec.p2 && rec.crop_box) {
        const Point recomputed = from_crop(*rec.p2, crop_from_corners(*rec.crop_box, rec.r, rec.p1));
        if (std::abs(recomputed.x - rec.final_point->x) > kFinalTolerance ||
            std::abs(recomputed.y - rec.final_point->y) > kFinalTolerance) {
            warnings.emplace_back("stored final disagrees with remapped p2 by more than 1e-6; stored value kept");
        }
    }

    for (const auto& [name, p] : {std::pair{"p1", rec.p1}, std::pair{"p2", rec.p2}, std::pair{"final", rec.final_point}}) {
        if (p && !on_canvas(*p)) warnings.emplace_back(std::string(name) + " lies outside [0, 1000]^2");
    }
    return rec;
}

}  // namespace

ParsedLog parse_log(std::istream& in) {
    if (!in) throw Error(ErrorKind::Io, "log stream is not readable");
    ParsedLog out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<std::string> warnings;
        try {
            out.records.push_back(parse_record(line, warnings));
            for (auto& w : warnings) out.diagnostics.push_back({line_no, std::move(w), false});
        } catch (const LineError& e) {
            out.diagnostics.push_back({line_no, e.message, true});
        }
    }
    if (in.bad()) throw Error(ErrorKind::Io, "read error after line " + std::to_string(line_no));
    if (out.records.empty()) throw Error(ErrorKind::EmptyLog, "no valid records in log");
    return out;
}

ParsedLog read_log_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
    return parse_log(in);
}

ZoomTrace to_trace(const LogRecord& rec) {
    ZoomTrace trace;
    trace.r = rec.r;
    trace.p1 = rec.p1;
    trace.parse_failed_stage = rec.parse_failed_stage;
    if (rec.crop_box) {
        trace.crop = crop_from_corners(*rec.crop_box, rec.r, rec.p1);
    } else if (rec.p1) {
        trace.crop = make_crop(*rec.p1, rec.r);
    }
    if (rec.p2 && trace.crop) {
        trace.p2_crop = rec.p2;
        trace.consistency = consistency(*rec.p2);
        trace.final_point = rec.final_point ? *rec.final_point : from_crop(*rec.p2, *trace.crop);
    }
    return trace;
}

std::vector<std::string> model_names(std::span<const LogRecord> records) {
    std::vector<std::string> names;
    std::set<std::string> seen;
    for (const auto& r : records) {
        if (seen.insert(r.model).second) names.push_back(r.model);
    }
    return names;
}

PairedDataset pair_models(std::span<const LogRecord> records, const std::string& model_a,
                          const std::string& model_b) {
    std::map<std::pair<std::string, std::string>, std::size_t> seen;
    std::set<std::string> duplicates;
    bool has_a = false;
    bool has_b = false;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        has_a |= r.model == model_a;
        has_b |= r.model == model_b;
        if (!seen.emplace(std::pair{r.sample_id, r.model}, i).second) {
            duplicates.insert(r.sample_id + "/" + r.model);
        }
    }
    if (!duplicates.empty()) {
        std::string list;
        for (const auto& d : duplicates) list += (list.empty() ? "" : ", ") + d;
        throw Error(ErrorKind::DuplicateRecord, "duplicate (sample_id, model) records: " + list);
    }
    if (!has_a) throw Error(ErrorKind::MissingModel, "model '" + model_a + "' not present in the log");
    if (!model_b.empty() && !has_b) {
        throw Error(ErrorKind::MissingModel, "model '" + model_b + "' not present in the log");
    }

    PairedDataset data;
    data.model_a = model_a;
    data.model_b = model_b;
    std::map<std::string, std::size_t> index;
    for (const auto& r : records) {
        if (r.model != model_a) continue;
        SampleRecord s;
        s.sample_id = r.sample_id;
        s.gt_bbox = r.gt_bbox;
        s.labels = {{"category", r.category}, {"os", r.os}, {"application", r.application}};
        index[r.sample_id] = data.samples.size();
        data.samples.push_back(std::move(s));
    }
    for (const auto& r : records) {
        auto it = index.find(r.sample_id);
        if (it == index.end()) continue;
        data.samples[it->second].traces[r.model] = to_trace(r);
    }
    for (auto& s : data.samples) rescore(s);
    return data;
}

std::vector<LogRecord> to_log_records(const SampleRecord& sample) {
    std::vector<LogRecord> out;
    for (const auto& [model, trace] : sample.traces) {
        LogRecord rec;
        rec.sample_id = sample.sample_id;
        rec.model = model;
        rec.r = trace.r;
        rec.p1 = trace.p1;
        if (trace.crop) rec.crop_box = trace.crop->box;
        rec.p2 = trace.p2_crop;
        rec.final_point = trace.final_point;
        rec.gt_bbox = sample.gt_bbox;
        auto label = [&](const char* key) {
            auto it = sample.labels.find(key);
            return it == sample.labels.end() ? std::string() : it->second;
        };
        rec.category = label("category");
        rec.os = label("os");
        rec.application = label("application");
        rec.parse_failed_stage = trace.parse_failed_stage;
        out.push_back(std::move(rec));
    }
    return out;
}

std::string to_jsonl_line(const LogRecord& rec) {
    nlohmann::ordered_json obj;
    obj["sample_id"] = rec.sample_id;
    obj["model"] = rec.model;
    obj["r"] = rec.r;
    obj["p1"] = point_json(rec.p1);
    obj["crop_box"] = box_json(rec.crop_box);
    obj["p2"] = point_json(rec.p2);
    obj["final"] = point_json(rec.final_point);
    obj["gt_bbox"] = box_json(rec.gt_bbox);
    obj["category"] = rec.category;
    obj["os"] = rec.os;
    obj["application"] = rec.application;
    switch (rec.parse_failed_stage) {
        case ParseStage::None: obj["parse_failed_stage"] = nullptr; break;
        case ParseStage::Step1: obj["parse_failed_stage"] = 1; break;
        case ParseStage::Step2: obj["parse_failed_stage"] = 2; break;
    }
    return obj.dump();
}

void write_jsonl(std::ostream& out, std::span<const SampleRecord> samples) {
    for (const auto& s : samples) {
        for (const auto& rec : to_log_records(s)) out << to_jsonl_line(rec) << '\n';
    }
}

}  // namespace zoomsig
