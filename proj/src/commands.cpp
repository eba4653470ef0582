#include "rankq/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "rankq/error.hpp"
#include "rankq/format.hpp"
#include "rankq/rng.hpp"
#include "rankq/simulator.hpp"

namespace rankq {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path + "'");
    return out;
}

// Text output uses the same shortest round-trip representation as the JSON
// serialiser, so both carry identical numbers.
std::string num(double x) {
    if (!std::isfinite(x)) return x < 0 ? "-inf" : (x > 0 ? "inf" : "nan");
    return json(x).dump();
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// Wraps a command body so that input errors map to the documented status.
template <class Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInputError;
    }
}

struct Evaluation {
    std::size_t pairs = 0;
    std::size_t groups = 0;
    std::uint64_t blocks = 0;
    QResult result;
    Decision decision = Decision::Indistinguishable;
};

Evaluation evaluate_files(const std::string& model_path, const std::string& predictions_path,
                          const RunConfig& config) {
    auto model_in = open_input(model_path);
    const auto models = parse_targets(model_in);
    if (models.empty()) throw Error("model file '" + model_path + "' has no pairs");
    auto pred_in = open_input(predictions_path);
    const auto seq = parse_predictions(pred_in, models);

    const auto grouped = group_pairs(models, config.quantization_step, config.clamp_certain);
    Evaluation ev;
    ev.pairs = models.size();
    ev.groups = grouped.groups.size();
    ev.blocks = block_count(grouped);
    ev.result = compute_q(grouped, seq, {config.enumeration_cap, config.dp_bin_width});
    ev.decision = decide(ev.result.q, config.epsilon);
    return ev;
}

ThetaDistribution theta_from_json(const json& j) {
    const auto family = j.at("family").get<std::string>();
    if (family == "uniform") return UniformTheta{j.at("a").get<double>(), j.at("b").get<double>()};
    if (family == "point_mixture") {
        PointMixtureTheta pm;
        for (const auto& p : j.at("points")) {
            if (!p.is_array() || p.size() != 2) throw Error("point_mixture points are [theta, weight]");
            pm.points.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
        return pm;
    }
    if (family == "beta") {
        return BetaTheta{j.at("mean").get<double>(), j.at("concentration").get<double>()};
    }
    throw Error("unknown theta family '" + family + "'");
}

struct MachineEntry {
    std::string name;
    MachineSpec spec;
    int count = 1;
};

bool valid_name(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-';
    });
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
    if (!j.is_object()) throw Error(std::string(where) + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end()) {
            throw Error(std::string("unknown key '") + key + "' in " + where);
        }
    }
}

}  // namespace

void validate(const RunConfig& c) {
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw Error("--epsilon must lie in (0, 1)");
    if (!(c.quantization_step == 0.0 ||
          (c.quantization_step >= 1e-6 && c.quantization_step <= 0.25))) {
        throw Error("--quantize must be 0 or within [1e-6, 0.25]");
    }
    if (c.enumeration_cap < 1) throw Error("--cap must be at least 1");
    if (!(c.dp_bin_width > 0.0 && c.dp_bin_width <= 1.0)) {
        throw Error("--bin-width must lie in (0, 1]");
    }
    if (c.filter.discard_at < 1) throw Error("--max-undecided must be at least 1");
}

int cmd_estimate(const std::string& annotations_path, const std::string& targets_path,
                 const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        validate(config);
        auto in = open_input(annotations_path);
        const auto records = parse_annotations(in);
        const auto filtered = filter_pairs(records, config.filter);
        if (filtered.kept.empty()) throw Error("no pairs left after filtering");

        EstimationConfig est;
        est.policy = config.policy;
        est.confidence.include_unscored_votes = config.include_unscored_votes;
        const auto models = build_pair_models(filtered.kept, est);

        auto sink = open_output(targets_path);
        export_targets(models, sink);

        const auto grouped = group_pairs(models, config.quantization_step, config.clamp_certain);
        const auto blocks = block_count(grouped);

        if (config.json) {
            json j;
            j["pairs"] = json::array();
            for (const auto& m : models) {
                j["pairs"].push_back({{"pair_id", m.pair_id},
                                      {"theta", m.theta},
                                      {"flipped", m.flipped},
                                      {"provenance", to_string(m.provenance)}});
            }
            j["dropped"] = filtered.dropped;
            j["groups"] = grouped.groups.size();
            j["blocks"] = blocks;
            j["targets"] = targets_path;
            out << j.dump(2) << '\n';
        } else {
            out << "pair_id\ttheta\tprovenance\n";
            for (const auto& m : models) {
                out << m.pair_id << '\t' << num(m.theta) << '\t' << to_string(m.provenance) << '\n';
            }
            out << "pairs: " << models.size() << "  dropped: " << filtered.dropped.size()
                << "  groups (G): " << grouped.groups.size() << "  blocks (J): " << blocks << '\n';
            out << "targets written to " << targets_path << '\n';
        }
        for (const auto& id : filtered.dropped) err << "dropped pair '" << id << "'\n";
        return kExitOk;
    });
}

int cmd_evaluate(const std::string& model_path, const std::string& predictions_path,
                 const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        validate(config);
        const auto ev = evaluate_files(model_path, predictions_path, config);
        const auto& r = ev.result;
        if (config.json) {
            json j{{"q", r.q},
                   {"q_percent", format_percent(r.q)},
                   {"method", to_string(r.method)},
                   {"tie_mass", r.tie_mass},
                   {"target_log_p", finite_or_null(r.target_log_p)},
                   {"epsilon", config.epsilon},
                   {"verdict", to_string(ev.decision)},
                   {"pairs", ev.pairs},
                   {"groups", ev.groups},
                   {"blocks", ev.blocks}};
            if (r.error_bound) j["error_bound"] = *r.error_bound;
            if (r.effective_bin_width) j["bin_width"] = *r.effective_bin_width;
            out << j.dump(2) << '\n';
        } else {
            out << "pairs        " << ev.pairs << '\n'
                << "groups       " << ev.groups << '\n'
                << "blocks       " << ev.blocks << '\n'
                << "method       " << to_string(r.method) << '\n'
                << "Q            " << format_percent(r.q) << "%  (q = " << num(r.q) << ")\n"
                << "tie mass     " << num(r.tie_mass) << '\n'
                << "log p(x)     " << num(r.target_log_p) << '\n';
            if (r.error_bound) out << "error bound  " << num(*r.error_bound) << '\n';
            if (r.effective_bin_width) out << "bin width    " << num(*r.effective_bin_width) << '\n';
            out << "epsilon      " << num(config.epsilon) << '\n'
                << "verdict      " << to_string(ev.decision) << '\n';
        }
        return kExitOk;
    });
}

int cmd_report(const std::string& manifest_path, const std::optional<std::string>& html_path,
               const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        validate(config);
        auto in = open_input(manifest_path);
        const fs::path base = fs::path(manifest_path).parent_path();

        ReportTable table;
        table.epsilon = config.epsilon;
        struct Cell {
            std::string model;
            std::string predictions;
        };
        std::map<std::pair<std::string, std::string>, Cell> cells;

        std::string line;
        std::size_t line_no = 0;
        bool header_seen = false;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            std::vector<std::string> fields;
            std::stringstream ss(line);
            for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
            if (!header_seen) {
                if (line != "method,attribute,model,predictions") {
                    throw ParseError(line_no, "expected header 'method,attribute,model,predictions'");
                }
                header_seen = true;
                continue;
            }
            if (fields.size() != 4) throw ParseError(line_no, "expected 4 fields");
            const auto& method = fields[0];
            const auto& attribute = fields[1];
            if (std::find(table.methods.begin(), table.methods.end(), method) == table.methods.end()) {
                table.methods.push_back(method);
            }
            if (std::find(table.attributes.begin(), table.attributes.end(), attribute) ==
                table.attributes.end()) {
                table.attributes.push_back(attribute);
            }
            auto resolve = [&](const std::string& p) {
                const fs::path path(p);
                return (path.is_absolute() ? path : base / path).string();
            };
            if (!cells.emplace(std::make_pair(method, attribute),
                               Cell{resolve(fields[2]), resolve(fields[3])})
                     .second) {
                throw ParseError(line_no, "duplicate cell " + method + "/" + attribute);
            }
        }
        if (table.methods.empty()) throw Error("manifest lists no cells");

        json j_cells = json::array();
        table.q.assign(table.attributes.size(),
                       std::vector<std::optional<double>>(table.methods.size()));
        for (std::size_t i = 0; i < table.attributes.size(); ++i) {
            for (std::size_t m = 0; m < table.methods.size(); ++m) {
                const auto key = std::make_pair(table.methods[m], table.attributes[i]);
                const auto it = cells.find(key);
                if (it == cells.end()) {
                    err << "warning: no entry for " << key.first << "/" << key.second << '\n';
                    continue;
                }
                try {
                    const auto ev = evaluate_files(it->second.model, it->second.predictions, config);
                    table.q[i][m] = ev.result.q;
                    j_cells.push_back({{"method", key.first},
                                       {"attribute", key.second},
                                       {"q", ev.result.q},
                                       {"q_percent", format_percent(ev.result.q)},
                                       {"flagged", flag_cell(ev.result.q, config.epsilon)},
                                       {"evaluator", to_string(ev.result.method)}});
                } catch (const Error& e) {
                    err << "warning: " << key.first << "/" << key.second << ": " << e.what() << '\n';
                }
            }
        }

        if (html_path) {
            auto html = open_output(*html_path);
            html << render_html(table);
        }
        if (config.json) {
            json j{{"epsilon", config.epsilon},
                   {"methods", table.methods},
                   {"attributes", table.attributes},
                   {"cells", j_cells}};
            out << j.dump(2) << '\n';
        } else {
            out << render_text(table);
        }
        return kExitOk;
    });
}

int cmd_simulate(const std::string& spec_path, const std::string& output_dir,
                 const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto in = open_input(spec_path);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw Error("spec '" + spec_path + "' is not valid JSON: " + e.what());
        }
        check_keys(j,
                   {"n_pairs", "annotators_per_pair", "second_round_annotators", "scores",
                    "flip_probability", "seed", "theta", "confidence", "machines"},
                   "spec");

        PopulationSpec spec;
        const auto n_pairs = j.at("n_pairs").get<long long>();
        if (n_pairs < 1) throw Error("n_pairs must be at least 1");
        spec.n_pairs = static_cast<std::size_t>(n_pairs);
        spec.annotators_per_pair = j.value("annotators_per_pair", 5);
        spec.second_round_annotators = j.value("second_round_annotators", 0);
        spec.scores = j.value("scores", true);
        spec.flip_probability = j.value("flip_probability", 0.5);
        spec.seed = config.seed.value_or(j.value("seed", std::uint64_t{0}));
        if (j.contains("theta")) spec.theta_distribution = theta_from_json(j.at("theta"));
        if (j.contains("confidence")) {
            const auto& c = j.at("confidence");
            check_keys(c, {"max_entropy", "polarized", "moderate"}, "confidence");
            spec.confidence_model = {c.value("max_entropy", 0.0), c.value("polarized", 0.0),
                                     c.value("moderate", 0.0)};
        }
        validate(spec);

        std::vector<MachineEntry> machines;
        for (const auto& m : j.value("machines", json::array())) {
            check_keys(m, {"name", "mode", "flip_rate", "count"}, "machine");
            MachineEntry e;
            e.name = m.at("name").get<std::string>();
            if (!valid_name(e.name)) throw Error("machine name '" + e.name + "' is not a valid file stem");
            const auto mode = m.at("mode").get<std::string>();
            if (mode == "human") {
                e.spec.mode = MachineMode::Human;
            } else if (mode == "modal") {
                e.spec.mode = MachineMode::Modal;
            } else if (mode == "adversarial") {
                e.spec.mode = MachineMode::Adversarial;
                e.spec.flip_rate = m.at("flip_rate").get<double>();
                if (!(e.spec.flip_rate >= 0.0 && e.spec.flip_rate <= 1.0)) {
                    throw Error("flip_rate must lie in [0, 1]");
                }
            } else {
                throw Error("unknown machine mode '" + mode + "'");
            }
            e.count = m.value("count", 1);
            if (e.count < 1) throw Error("machine count must be at least 1");
            machines.push_back(std::move(e));
        }

        const auto truth = sample_population(spec);
        const auto records = sample_annotations(truth, spec);

        fs::create_directories(output_dir);
        const fs::path dir(output_dir);
        std::vector<std::string> written;
        {
            const auto path = (dir / "annotations.csv").string();
            auto sink = open_output(path);
            write_annotations(records, sink);
            written.push_back(path);
        }
        {
            const auto path = (dir / "truth.csv").string();
            auto sink = open_output(path);
            export_targets(truth, sink);
            written.push_back(path);
        }
        for (std::size_t mi = 0; mi < machines.size(); ++mi) {
            const auto& m = machines[mi];
            for (int r = 0; r < m.count; ++r) {
                const auto seq = sample_machine_sequence(
                    truth, m.spec, derive_seed(spec.seed, 100 + mi, static_cast<std::uint64_t>(r)));
                const std::string stem =
                    "predictions_" + m.name + (m.count > 1 ? "_" + std::to_string(r) : "");
                const auto path = (dir / (stem + ".csv")).string();
                auto sink = open_output(path);
                write_predictions(seq, truth, sink);
                written.push_back(path);
            }
        }

        double sum = 0.0, lo = 1.0, hi = 0.5;
        for (const auto& p : truth) {
            sum += p.theta;
            lo = std::min(lo, p.theta);
            hi = std::max(hi, p.theta);
        }
        const auto filtered = filter_pairs(records, FilterPolicy::train());
        std::size_t unanimous = 0;
        for (const auto& c : filtered.kept) unanimous += detect_unanimous(c) ? 1 : 0;

        if (config.json) {
            out << json{{"pairs", truth.size()},
                        {"annotation_rows", records.size()},
                        {"theta_mean", sum / truth.size()},
                        {"theta_min", lo},
                        {"theta_max", hi},
                        {"unanimous_pairs", unanimous},
                        {"seed", spec.seed},
                        {"files", written}}
                       .dump(2)
                << '\n';
        } else {
            out << "pairs            " << truth.size() << '\n'
                << "annotation rows  " << records.size() << '\n'
                << "theta mean       " << num(sum / truth.size()) << "  (min " << num(lo)
                << ", max " << num(hi) << ")\n"
                << "unanimous pairs  " << unanimous << '\n'
                << "seed             " << spec.seed << '\n';
            for (const auto& f : written) out << "wrote " << f << '\n';
        }
        return kExitOk;
    });
}

}  // namespace rankq
