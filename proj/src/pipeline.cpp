// SPDX-License-Identifier: Apache-2.0

#include "handbooster/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "handbooster/assets.hpp"
#include "handbooster/condition_gen.hpp"
#include "handbooster/errors.hpp"
#include "handbooster/manifest.hpp"
#include "handbooster/metrics.hpp"
#include "handbooster/parallel.hpp"
#include "handbooster/sampler.hpp"
#include "handbooster/skinning.hpp"
#include "handbooster/validator.hpp"

namespace handbooster {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kLabeled = "labeled.jsonl";
constexpr const char* kCandidates = "candidates.jsonl";
constexpr const char* kValidated = "validated.jsonl";
constexpr const char* kDataset = "dataset.jsonl";
constexpr const char* kAnnotations = "annotations.jsonl";
constexpr const char* kKept = "kept.jsonl";
constexpr const char* kConditions = "conditions";
constexpr const char* kReport = "report.json";

// Rethrows the in-flight exception with `prefix` prepended, keeping its type.
[[noreturn]] void rethrow_prefixed(const std::string& prefix) {
    try {
        throw;
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + e.what());
    } catch (const InvalidInput& e) {
        throw InvalidInput(prefix + e.what());
    } catch (const ContractViolation& e) {
        throw ContractViolation(prefix + e.what());
    } catch (const LookupError& e) {
        throw LookupError(prefix + e.what());
    } catch (const DegenerateError& e) {
        throw DegenerateError(prefix + e.what());
    } catch (const DataError& e) {
        throw DataError(prefix + e.what());
    } catch (const Error& e) {
        throw Error(prefix + e.what());
    } catch (const fs::filesystem_error& e) {
        throw DataError(prefix + e.what());
    }
}

template <class F>
auto for_record(const std::string& id, F&& f) {
    try {
        return f();
    } catch (...) {
        rethrow_prefixed("record " + id + ": ");
    }
}

fs::path stats_path(const fs::path& out, const std::string& stage) { return out / (stage + ".stats.json"); }

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

Manifest require_manifest(const fs::path& path, const char* producer) {
    if (!fs::exists(path)) {
        throw DataError(path.filename().string() + " not found; run the " + std::string(producer) + " stage first");
    }
    return read_manifest(path);
}

Rig load_pipeline_rig(const PipelineConfig& cfg) {
    if (cfg.rig == "toy") return make_toy_rig().rig;
    try {
        return load_rig(cfg.rig);
    } catch (const InvalidInput& e) {
        throw DataError(std::string("rig: ") + e.what());
    }
}

fs::path assets_dir(const PipelineConfig& cfg) {
    if (!cfg.assets.empty()) return cfg.assets;
    const Manifest real = read_manifest(cfg.real_manifest);
    if (real.header.assets.empty()) {
        throw ConfigError("no asset directory: set `assets` or give the real manifest header an \"assets\" path");
    }
    return cfg.real_manifest.parent_path() / real.header.assets;
}

void check_manifest(const Manifest& m, const Rig& rig, const AssetRegistry& assets, const std::string& name) {
    if (m.header.joint_count != rig.articulated_count()) {
        throw DataError(name + ": joint_count " + std::to_string(m.header.joint_count) + " does not match the rig's " +
                        std::to_string(rig.articulated_count()));
    }
    for (const auto& e : m.entries) {
        if (!assets.contains(e.record.object_id)) {
            throw DataError(name + ": record " + e.record.id() + " references unknown object '" +
                            e.record.object_id + "'");
        }
    }
}

Manifest with_header_of(const Manifest& src) {
    Manifest m;
    m.header = src.header;
    m.header.assets.clear();  // outputs resolve assets through the config
    return m;
}

json verdict_json(const GraspVerdict& v) {
    return {{"valid", v.valid},
            {"contact_distance_mm", v.contact_distance},
            {"intersection_volume_cm3", v.intersection_volume},
            {"self_penetration_pairs", v.self_penetration_pairs},
            {"reasons", v.reasons}};
}

// ---------------------------------------------------------------- label

void stage_label(const PipelineConfig& cfg, const fs::path& out) {
    if (cfg.real_manifest.empty()) throw ConfigError("real_manifest is not set");
    const Manifest real = read_manifest(cfg.real_manifest);
    const Rig rig = load_pipeline_rig(cfg);
    const AssetRegistry assets = AssetRegistry::load(assets_dir(cfg));
    check_manifest(real, rig, assets, cfg.real_manifest.filename().string());

    std::map<std::string, std::vector<GraspRecord>> sequences;
    std::map<std::string, json> extras;
    for (const auto& e : real.entries) {
        auto& seq = sequences[e.record.sequence_id];
        if (!seq.empty() && seq.front().object_id != e.record.object_id) {
            throw DataError("record " + e.record.id() + ": sequence mixes objects '" + seq.front().object_id +
                            "' and '" + e.record.object_id + "'");
        }
        seq.push_back(e.record);
        extras[e.record.id()] = e.extra;
    }

    Manifest labeled = with_header_of(real);
    std::map<std::string, std::pair<std::size_t, std::size_t>> per_object;  // frames, grasping
    std::size_t grasping = 0;
    for (auto& [seq_id, frames] : sequences) {
        const auto out_frames = for_record(frames.front().id(), [&] { return label_sequence(frames, cfg.label); });
        for (const auto& g : out_frames) {
            auto& po = per_object[g.object_id];
            ++po.first;
            if (*g.grasping) ++po.second, ++grasping;
            labeled.entries.push_back({g, extras[g.id()]});
        }
    }
    write_manifest(out / kLabeled, labeled);

    json stats;
    stats["sequences"] = sequences.size();
    stats["frames"] = labeled.entries.size();
    stats["grasping_frames"] = grasping;
    stats["thresholds"] = {{"rre_deg", cfg.label.rre_deg},
                           {"rte_mm", cfg.label.rte_mm},
                           {"rule", cfg.label.rule == MotionRule::either ? "either" : "both"}};
    stats["per_object"] = json::object();
    stats["warnings"] = json::array();
    for (const auto& [obj, c] : per_object) {
        stats["per_object"][obj] = {{"frames", c.first}, {"grasping_frames", c.second}};
        if (c.second == 0) stats["warnings"].push_back("object " + obj + ": no grasping frames among real sequences");
    }
    write_json(stats_path(out, "label"), stats);
}

// ---------------------------------------------------------------- sample

void stage_sample(const PipelineConfig& cfg, const fs::path& out) {
    const Manifest labeled = require_manifest(out / kLabeled, "label");
    const Rig rig = load_pipeline_rig(cfg);
    const AssetRegistry assets = AssetRegistry::load(assets_dir(cfg));
    Manifest synthetic;
    synthetic.header = labeled.header;
    if (!cfg.synthetic_manifest.empty()) {
        synthetic = read_manifest(cfg.synthetic_manifest);
        check_manifest(synthetic, rig, assets, cfg.synthetic_manifest.filename().string());
    }

    std::map<std::string, std::vector<GraspRecord>> real_by_obj, synth_by_obj;
    std::set<std::string> objects;
    for (const auto& e : labeled.entries) {
        objects.insert(e.record.object_id);
        if (e.record.grasping.value_or(false)) real_by_obj[e.record.object_id].push_back(e.record);
    }
    for (const auto& e : synthetic.entries) {
        objects.insert(e.record.object_id);
        synth_by_obj[e.record.object_id].push_back(e.record);
    }

    Manifest candidates = with_header_of(labeled);
    json prep = {{"per_object", json::object()}, {"warnings", json::array()}};
    json samp = {{"per_object", json::object()}, {"warnings", json::array()}};
    const bool novel_view_only = synthetic.entries.empty();
    if (novel_view_only) samp["warnings"].push_back("synthetic pool is empty: novel-view-only mode");

    for (const auto& obj : objects) {
        const auto& R = real_by_obj[obj];
        const auto& S = synth_by_obj[obj];
        json po = {{"real_grasping", R.size()}, {"synthetic", S.size()}};

        FpsResult fr, fs_;
        if (!R.empty()) {
            fr = farthest_pose_sampling(PoseSet::from_records(R, obj, Source::real), std::min(cfg.M, R.size()),
                                        split_seed(cfg.seed, "fps-real/" + obj));
        }
        po["real_selected"] = fr.indices.size();
        po["real_selected_ids"] = json::array();
        for (std::size_t i : fr.indices) po["real_selected_ids"].push_back(R[i].id());
        if (S.empty()) {
            po["synthetic_selected"] = 0;
            prep["per_object"][obj] = po;
            continue;
        }
        fs_ = farthest_pose_sampling(PoseSet::from_records(S, obj, Source::synthetic), std::min(cfg.N, S.size()),
                                     split_seed(cfg.seed, "fps-synthetic/" + obj));
        po["synthetic_selected"] = fs_.indices.size();

        SamplingDistribution dist;
        if (fr.indices.empty()) {
            dist.object_id = obj;
            dist.probabilities.assign(fs_.indices.size(), 1.0 / static_cast<double>(fs_.indices.size()));
            dist.raw_scores.assign(fs_.indices.size(), 0.0);
            prep["warnings"].push_back("object " + obj + ": no real grasping poses, synthetic draws are uniform");
        } else {
            dist = cross_distribution_weights(fs_.selected, fr.selected);
        }
        const auto [pmin, pmax] = std::minmax_element(dist.probabilities.begin(), dist.probabilities.end());
        po["probability_min"] = *pmin;
        po["probability_max"] = *pmax;
        prep["per_object"][obj] = po;

        for (std::size_t s = 0; s < cfg.draws_per_object; ++s) {
            const std::uint64_t slot_seed = split_seed(cfg.seed, "draw/" + obj, s);
            for (int a = 0; a < cfg.retry_cap; ++a) {
                Rng rng = make_rng(slot_seed, "attempt", static_cast<std::uint64_t>(a));
                const GraspRecord& src = S[fs_.indices[draw_one(dist, rng)]];
                Quaternion ref;
                std::string ref_id;
                if (!fr.indices.empty()) {
                    const GraspRecord& r = R[fr.indices[uniform_index(rng, fr.indices.size())]];
                    ref = r.hand.global_orient;
                    ref_id = r.id();
                }
                GraspRecord c = for_record(src.id(), [&] { return align_orientation(canonicalize(src), ref); });
                c.source = Source::synthetic;
                c.grasping.reset();
                c.sequence_id = obj + "_synth";
                c.frame_index = static_cast<std::int64_t>(s) * cfg.retry_cap + a;
                json extra = {{"slot", s}, {"attempt", a}, {"drawn_from", src.id()}};
                extra["reference"] = ref_id.empty() ? json(nullptr) : json(ref_id);
                candidates.entries.push_back({std::move(c), std::move(extra)});
            }
        }
        samp["per_object"][obj] = {{"slots", cfg.draws_per_object}, {"attempts_per_slot", cfg.retry_cap}};
    }
    write_manifest(out / kCandidates, candidates);
    samp["mode"] = novel_view_only ? "novel-view-only" : "full";
    samp["candidates"] = candidates.entries.size();
    prep["M"] = cfg.M;
    prep["N"] = cfg.N;
    write_json(stats_path(out, "prepare"), prep);
    write_json(stats_path(out, "sample"), samp);
}

// ---------------------------------------------------------------- validate

void stage_validate(const PipelineConfig& cfg, const fs::path& out) {
    const Manifest candidates = require_manifest(out / kCandidates, "sample");
    const Rig rig = load_pipeline_rig(cfg);
    const AssetRegistry assets = AssetRegistry::load(assets_dir(cfg));
    check_manifest(candidates, rig, assets, kCandidates);

    // Slots in file order; each lists its attempts in attempt order.
    struct Slot {
        std::string object;
        std::int64_t slot = 0;
        std::vector<std::size_t> attempts;  // entry indices
    };
    std::vector<Slot> slots;
    std::map<std::pair<std::string, std::int64_t>, std::size_t> slot_of;
    for (std::size_t i = 0; i < candidates.entries.size(); ++i) {
        const auto& e = candidates.entries[i];
        if (!e.extra.contains("slot") || !e.extra["slot"].is_number_integer()) {
            throw DataError("record " + e.record.id() + ": candidate without a slot");
        }
        const auto key = std::make_pair(e.record.object_id, e.extra["slot"].get<std::int64_t>());
        auto [it, fresh] = slot_of.emplace(key, slots.size());
        if (fresh) slots.push_back({key.first, key.second, {}});
        slots[it->second].attempts.push_back(i);
    }

    struct Outcome {
        std::vector<GraspVerdict> verdicts;  // evaluated attempts, last one valid unless exhausted
        bool accepted = false;
    };
    std::vector<Outcome> outcomes(slots.size());
    parallel_for(slots.size(), cfg.workers, [&](std::size_t k) {
        for (std::size_t i : slots[k].attempts) {
            const GraspRecord& g = candidates.entries[i].record;
            auto v = for_record(g.id(), [&] { return validate_grasp(g, rig, assets, cfg.validation); });
            outcomes[k].verdicts.push_back(v);
            if (v.valid) {
                outcomes[k].accepted = true;
                break;
            }
        }
    });

    std::map<std::string, std::size_t> histogram;
    std::map<std::string, json> per_object;
    std::set<std::string> skipped;
    json warnings = json::array();
    std::size_t evaluated = 0, rejected = 0;
    for (std::size_t k = 0; k < slots.size(); ++k) {
        auto& po = per_object[slots[k].object];
        if (po.is_null()) po = {{"slots", 0}, {"accepted", 0}, {"attempts", 0}, {"exhausted_slots", 0}};
        po["slots"] = po["slots"].get<std::size_t>() + 1;
        po["attempts"] = po["attempts"].get<std::size_t>() + outcomes[k].verdicts.size();
        evaluated += outcomes[k].verdicts.size();
        for (const auto& v : outcomes[k].verdicts) {
            if (!v.valid) ++rejected;
            for (const auto& r : v.reasons) ++histogram[r];
        }
        if (outcomes[k].accepted) {
            po["accepted"] = po["accepted"].get<std::size_t>() + 1;
        } else {
            po["exhausted_slots"] = po["exhausted_slots"].get<std::size_t>() + 1;
            if (skipped.insert(slots[k].object).second) {
                warnings.push_back("object " + slots[k].object + ": retry cap of " + std::to_string(cfg.retry_cap) +
                                   " exhausted at slot " + std::to_string(slots[k].slot) + ", object skipped");
            }
        }
    }

    Manifest validated = with_header_of(candidates);
    for (std::size_t k = 0; k < slots.size(); ++k) {
        if (!outcomes[k].accepted) continue;
        if (skipped.count(slots[k].object)) {
            ++histogram["object-skipped"];
            continue;
        }
        const std::size_t i = slots[k].attempts[outcomes[k].verdicts.size() - 1];
        ManifestEntry e = candidates.entries[i];
        e.record.frame_index = slots[k].slot;
        e.record.grasping = true;
        e.extra.erase("slot");
        e.extra["verdict"] = verdict_json(outcomes[k].verdicts.back());
        validated.entries.push_back(std::move(e));
    }
    write_manifest(out / kValidated, validated);

    json stats;
    stats["thresholds"] = {{"contact_mm", cfg.validation.contact_mm},
                           {"volume_cm3", cfg.validation.volume_cm3},
                           {"voxel_mm", cfg.validation.voxel_mm}};
    stats["retry_cap"] = cfg.retry_cap;
    stats["attempts_evaluated"] = evaluated;
    stats["rejected_attempts"] = rejected;
    stats["accepted"] = validated.entries.size();
    stats["rejections"] = histogram;
    stats["per_object"] = per_object;
    stats["skipped_objects"] = skipped;
    stats["warnings"] = warnings;
    write_json(stats_path(out, "validate"), stats);
}

// ---------------------------------------------------------------- render

void stage_render(const PipelineConfig& cfg, const fs::path& out) {
    const Manifest labeled = require_manifest(out / kLabeled, "label");
    const Manifest validated = require_manifest(out / kValidated, "validate");
    const Rig rig = load_pipeline_rig(cfg);
    const AssetRegistry assets = AssetRegistry::load(assets_dir(cfg));

    std::vector<GraspRecord> records;
    std::size_t real_count = 0;
    for (const auto& e : labeled.entries) {
        if (e.record.grasping.value_or(false)) records.push_back(e.record), ++real_count;
    }
    for (const auto& e : validated.entries) records.push_back(e.record);

    // Plan views per record, keyed by record id so the plan does not depend
    // on which other records are present.
    std::vector<std::pair<GraspRecord, int>> plan;
    std::vector<std::string> origin;
    for (const auto& g : records) {
        auto views = for_record(g.id(), [&] {
            return plan_novel_views({g}, cfg.views_per_pose, cfg.max_perturb_deg,
                                    split_seed(cfg.seed, "novel-view/" + g.id()));
        });
        for (auto& v : views) {
            plan.push_back(std::move(v));
            origin.push_back(g.id());
        }
    }

    const fs::path cond = out / kConditions;
    fs::path tmp = cond;
    tmp += ".tmp";
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    std::vector<json> sidecars(plan.size());
    std::vector<std::string> stems(plan.size());
    std::vector<std::string> annotations(plan.size());
    std::vector<GraspRecord> rendered(plan.size());
    try {
        parallel_for(plan.size(), cfg.workers, [&](std::size_t i) {
            for_record(origin[i], [&] {
                ConditionSet cs =
                    render_conditions(plan[i].first, rig, assets, cfg.camera, cfg.resolution, cfg.resolution);
                cs.view = plan[i].second;
                stems[i] = cs.stem();
                sidecars[i] = write_condition_set(cs, rig, tmp, cfg.variant);
                json a;
                a["id"] = stems[i];
                a["joints"] = json::array();
                for (const auto& p : cs.joints) a["joints"].push_back({p.x(), p.y(), p.z()});
                a["vertices"] = json::array();
                for (const auto& p : cs.hand_mesh.vertices) a["vertices"].push_back({p.x(), p.y(), p.z()});
                annotations[i] = a.dump();
                rendered[i] = cs.record;
            });
        });
        std::set<std::string> seen;
        for (std::size_t i = 0; i < plan.size(); ++i) {
            if (!seen.insert(stems[i]).second) throw DataError("record " + origin[i] + ": duplicate stem " + stems[i]);
        }
    } catch (...) {
        std::error_code ec;
        fs::remove_all(tmp, ec);
        throw;
    }

    Manifest dataset = with_header_of(labeled);
    std::string ann_text;
    std::size_t synthetic_sets = 0;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        GraspRecord g = rendered[i];
        g.sequence_id += "@" + std::to_string(plan[i].second);
        json extra = {{"stem", stems[i]}, {"view", plan[i].second}, {"origin", origin[i]}, {"files", sidecars[i]["images"]}};
        extra["files"]["mesh"] = sidecars[i]["mesh"];
        extra["files"]["sidecar"] = stems[i] + ".json";
        if (g.source == Source::synthetic) ++synthetic_sets;
        dataset.entries.push_back({std::move(g), std::move(extra)});
        ann_text += annotations[i] + "\n";
    }

    fs::remove_all(cond);
    fs::rename(tmp, cond);
    write_file_atomic(out / kAnnotations, ann_text);
    write_manifest(out / kDataset, dataset);

    json stats;
    stats["records"] = records.size();
    stats["real_records"] = real_count;
    stats["synthetic_records"] = records.size() - real_count;
    stats["condition_sets"] = plan.size();
    stats["synthetic_condition_sets"] = synthetic_sets;
    stats["views_per_pose"] = cfg.views_per_pose;
    stats["max_perturb_deg"] = cfg.max_perturb_deg;
    stats["resolution"] = {cfg.resolution, cfg.resolution};
    stats["variant"] = to_string(cfg.variant);
    stats["warnings"] = json::array();
    if (plan.empty()) stats["warnings"].push_back("no grasping records to render");
    write_json(stats_path(out, "render"), stats);
}

// ---------------------------------------------------------------- filter

void stage_filter(const PipelineConfig& cfg, const fs::path& out) {
    json stats;
    stats["warnings"] = json::array();
    if (cfg.predictions.empty()) {
        fs::remove(out / kKept);
        stats["skipped"] = true;
        stats["reason"] = "no predictions configured";
        write_json(stats_path(out, "filter"), stats);
        return;
    }
    const Manifest dataset = require_manifest(out / kDataset, "render");
    if (!fs::exists(out / kAnnotations)) throw DataError("annotations.jsonl not found; run the render stage first");
    auto records = load_eval_records(cfg.predictions, out / kAnnotations);
    MetricOptions opts;
    opts.auc_t_max = cfg.auc_t_max;
    opts.auc_steps = cfg.auc_steps;
    opts.f_thresholds = cfg.f_thresholds;
    opts.workers = cfg.workers;
    const MetricReport before = compute_report(records, opts);
    const auto [kept, dropped] = edge_case_filter(records, *cfg.edge_j_mm, *cfg.edge_v_mm);

    std::set<std::string> keep;
    for (const auto& r : kept) keep.insert(r.id);
    Manifest out_m = with_header_of(dataset);
    for (const auto& e : dataset.entries) {
        if (keep.count(e.extra.value("stem", std::string()))) out_m.entries.push_back(e);
    }
    write_manifest(out / kKept, out_m);

    stats["skipped"] = false;
    stats["thresholds"] = {{"j_pe_mm", *cfg.edge_j_mm}, {"v_pe_mm", *cfg.edge_v_mm}};
    stats["input"] = records.size();
    stats["kept"] = kept.size();
    stats["dropped"] = json::array();
    for (const auto& r : dropped) stats["dropped"].push_back(r.id);
    stats["metrics_before"] = report_to_json(before);
    if (!kept.empty()) {
        auto k = kept;
        stats["metrics_after"] = report_to_json(compute_report(k, opts));
    }
    write_json(stats_path(out, "filter"), stats);
}

json input_digest(const fs::path& p) {
    if (p.empty()) return nullptr;
    return {{"file", p.filename().string()}, {"sha256", sha256_hex(read_file(p))}};
}

}  // namespace

const char* to_string(Stage s) {
    switch (s) {
        case Stage::label: return "label";
        case Stage::sample: return "sample";
        case Stage::validate: return "validate";
        case Stage::render: return "render";
        case Stage::filter: return "filter";
    }
    return "?";
}

Stage stage_from_string(const std::string& s) {
    for (Stage st : all_stages()) {
        if (s == to_string(st)) return st;
    }
    throw ConfigError("unknown stage '" + s + "'");
}

const std::vector<Stage>& all_stages() {
    static const std::vector<Stage> stages{Stage::label, Stage::sample, Stage::validate, Stage::render, Stage::filter};
    return stages;
}

json write_report(const PipelineConfig& cfg, const fs::path& out) {
    json report;
    report["seed"] = cfg.seed;
    report["config_hash"] = config_hash(cfg);
    report["inputs"] = {{"real_manifest", input_digest(cfg.real_manifest)},
                        {"synthetic_manifest", input_digest(cfg.synthetic_manifest)},
                        {"predictions", input_digest(cfg.predictions)}};
    report["stages"] = json::object();
    json warnings = json::array();
    for (const char* name : {"label", "prepare", "sample", "validate", "render", "filter"}) {
        const fs::path p = stats_path(out, name);
        if (!fs::exists(p)) continue;
        json s;
        try {
            s = json::parse(read_file(p));
        } catch (const json::parse_error& e) {
            throw DataError(p.filename().string() + ": " + e.what());
        }
        for (const auto& w : s.value("warnings", json::array())) warnings.push_back(std::string(name) + ": " + w.get<std::string>());
        report["stages"][name] = s;
    }
    if (report["stages"].contains("sample")) report["mode"] = report["stages"]["sample"]["mode"];
    report["warnings"] = warnings;
    report["warning_count"] = warnings.size();
    write_json(out / kReport, report);
    return report;
}

void run_stage(Stage stage, const PipelineConfig& cfg, const fs::path& out) {
    cfg.validate();
    const std::string prefix = std::string("stage ") + to_string(stage) + ": ";
    try {
        fs::create_directories(out);
        switch (stage) {
            case Stage::label: stage_label(cfg, out); break;
            case Stage::sample: stage_sample(cfg, out); break;
            case Stage::validate: stage_validate(cfg, out); break;
            case Stage::render: stage_render(cfg, out); break;
            case Stage::filter: stage_filter(cfg, out); break;
        }
        write_report(cfg, out);
    } catch (...) {
        rethrow_prefixed(prefix);
    }
}

void run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    const fs::path out = cfg.out_dir;
    if (out.empty()) throw ConfigError("out_dir is not set");
    if (fs::exists(out) && !fs::is_empty(out) && !fs::exists(out / kReport)) {
        throw ConfigError("output directory " + out.string() + " exists and is not a pipeline output");
    }
    fs::path staging = out;
    staging += ".staging";
    fs::remove_all(staging);
    try {
        for (Stage s : all_stages()) run_stage(s, cfg, staging);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(staging, ec);
        throw;
    }
    fs::remove_all(out);
    fs::rename(staging, out);
}

std::string dry_run_plan(const PipelineConfig& cfg) {
    cfg.validate();
    std::ostringstream os;
    auto join = [](const std::vector<double>& v) {
        std::ostringstream s;
        for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "/" : "") << v[i];
        return s.str();
    };
    os << "seed=" << cfg.seed << " config_hash=" << config_hash(cfg) << " workers=" << cfg.workers << "\n";
    os << "1. label     rre>" << cfg.label.rre_deg << " deg " << (cfg.label.rule == MotionRule::either ? "or" : "and")
       << " rte>" << cfg.label.rte_mm << " mm vs first frame -> labeled.jsonl\n";
    os << "2. prepare   canonicalize, FPS M=" << cfg.M << " real / N=" << cfg.N
       << " synthetic per object, cross-distribution weights\n";
    os << "3. sample    " << cfg.draws_per_object << " draws per object, retry cap " << cfg.retry_cap
       << ", aligned to sampled real orientations -> candidates.jsonl\n";
    os << "4. validate  contact<=" << cfg.validation.contact_mm << " mm, intersection<=" << cfg.validation.volume_cm3
       << " cm3 (voxel " << cfg.validation.voxel_mm << " mm), no self-penetration -> validated.jsonl\n";
    os << "5. render    " << cfg.views_per_pose << " views per grasp, perturbation<=" << cfg.max_perturb_deg
       << " deg, resolution " << cfg.resolution << "x" << cfg.resolution << ", variant " << to_string(cfg.variant)
       << " -> conditions/, dataset.jsonl, annotations.jsonl\n";
    os << "6. filter    ";
    if (cfg.predictions.empty()) {
        os << "skipped (no predictions)\n";
    } else {
        os << "J-PE<=" << *cfg.edge_j_mm << " mm, V-PE<=" << *cfg.edge_v_mm << " mm -> kept.jsonl\n";
    }
    os << "7. report    F thresholds " << join(cfg.f_thresholds) << " mm, AUC 0-" << cfg.auc_t_max << " mm ("
       << cfg.auc_steps << " steps) -> report.json\n";
    os << "output: " << cfg.out_dir.string() << "\n";
    return os.str();
}

}  // namespace handbooster
