#include "rtlab/commands.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rtlab/errors.hpp"

namespace rtlab {

namespace {

LabeledDataset load_dataset(const fs::path& path) {
    std::istringstream in(read_text_file(path));
    return read_dataset(in);
}

EmpiricalRTD load_rtd(const fs::path& path) {
    std::istringstream in(read_text_file(path));
    return read_rtd(in);
}

ModelFile load_model(const fs::path& path) {
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return model_from_json(j);
}

void write_json(const fs::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

Json log_json(const CensoringLog& log) {
    return Json{{"launched", log.launched},
                {"under_horizon", log.under_horizon},
                {"rows", log.rows},
                {"capped", log.capped}};
}

Json expectation_json(const Expectation& e) {
    return e.unbounded ? Json(nullptr) : Json(e.value);
}

Json stats_json(const PolicyStats& s) {
    Json j;
    j["trials"] = s.trials;
    j["unbounded"] = s.unbounded;
    if (!s.unbounded) {
        j["mean_cost"] = s.mean_cost;
        j["cost_se"] = s.cost_se;
        j["mean_runs"] = s.mean_runs;
        j["runs_se"] = s.runs_se;
        j["p50"] = s.p50;
        j["p90"] = s.p90;
        j["p99"] = s.p99;
    }
    return j;
}

ModelFile make_model_file(DecisionTreeModel tree, const LabeledDataset& data, double kappa) {
    auto opts = infer_instrument_options(data.columns);
    if (!opts) throw DataError("dataset columns do not match the feature registry");
    ModelFile m;
    m.tree = std::move(tree);
    m.columns = data.columns;
    m.kappa = kappa;
    m.training_median = data.median;
    m.horizon = data.horizon;
    m.mode = data.mode;
    m.schema_hash = FeatureRegistry::standard(*opts).schema_hash();
    return m;
}

Json tuning_json(const KappaTuning& t) {
    Json j;
    j["kappa"] = t.kappa;
    j["fit_rows"] = t.fit_rows;
    j["holdout_rows"] = t.holdout_rows;
    j["split_attempts"] = t.split_attempts;
    j["trials"] = Json::array();
    for (const auto& k : t.trials) {
        j["trials"].push_back({{"kappa", k.kappa},
                               {"holdout_log_score", k.holdout_log_score},
                               {"holdout_accuracy", k.holdout_accuracy},
                               {"leaves", k.leaves}});
    }
    j["leaves"] = t.model.leaf_count();
    j["depth"] = t.model.depth();
    return j;
}

double rtd_median(const EmpiricalRTD& rtd) {
    auto q = rtd.quantile(0.5);
    return q ? static_cast<double>(*q) : INFINITY;
}

}  // namespace

// ---- dataset ---------------------------------------------------------------

Json dataset_command(const DatasetCommand& cmd) {
    ExperimentSpec spec = cmd.spec;
    Json report;
    report["provenance"] = provenance_json(cmd.prov);

    if (cmd.peak_search) {
        if (spec.mode != ExperimentMode::SingleInstance) throw DataError("peak search applies to single-instance mode");
        SolverConfig probe = spec.solver;
        probe.cutoff = cmd.peak_probe_cutoff;
        auto found = search_heavy_tailed_instance(spec.order, spec.holes, probe, spec.seed, cmd.peak_probe_runs,
                                                  cmd.peak_ratio, 20, spec.threads);
        Json peak;
        peak["probe_runs"] = cmd.peak_probe_runs;
        peak["probe_cutoff"] = cmd.peak_probe_cutoff;
        peak["min_ratio"] = cmd.peak_ratio;
        peak["candidates"] = Json::array();
        for (const auto& c : found.candidates) {
            peak["candidates"].push_back(
                {{"index", c.index}, {"solved", c.solved}, {"median", c.median}, {"max", c.max}, {"ratio", c.tail_ratio}});
        }
        spec.instance = found.instance;
        peak["chosen"] = found.chosen ? *found.chosen : found.heaviest;
        peak["met_ratio"] = found.chosen.has_value();
        report["peak_search"] = peak;
    }

    auto result = run_experiment(spec);

    std::ostringstream train, test, rtd;
    write_dataset(train, result.train, cmd.prov);
    write_dataset(test, result.test, cmd.prov);
    write_rtd(rtd, result.rtd, cmd.prov);
    write_text_file(cmd.out_dir / "train.csv", train.str());
    write_text_file(cmd.out_dir / "test.csv", test.str());
    write_text_file(cmd.out_dir / "rtd.txt", rtd.str());
    if (result.instance) {
        std::ostringstream inst;
        write_instance(inst, *result.instance, cmd.prov);
        write_text_file(cmd.out_dir / "instance.txt", inst.str());
    }

    report["train"] = log_json(result.train_log);
    report["test"] = log_json(result.test_log);
    report["training_median"] = result.train.median;
    report["train_short"] = result.train.short_count();
    report["test_short"] = result.test.short_count();
    report["rtd_runs"] = result.rtd.size();
    report["rtd_unsolved"] = result.rtd.unsolved();
    write_json(cmd.out_dir / "censoring.json", report);
    return report;
}

// ---- train / eval ----------------------------------------------------------

Json train_command(const TrainCommand& cmd) {
    auto data = load_dataset(cmd.train);
    if (data.rows.empty()) throw DataError("training dataset has no rows");
    auto tuning = tune_kappa(data.rows, cmd.kappa_grid, cmd.seed);
    auto model = make_model_file(tuning.model, data, tuning.kappa);

    Json mj = model_to_json(model);
    Json file;
    file["provenance"] = provenance_json(cmd.prov);
    for (auto& [k, v] : mj.items()) file[k] = v;
    write_json(cmd.model_out, file);

    Json report;
    report["provenance"] = provenance_json(cmd.prov);
    report["training_rows"] = data.rows.size();
    report["tuning"] = tuning_json(tuning);
    if (cmd.report_out) write_json(*cmd.report_out, report);
    return report;
}

Json eval_command(const EvalCommand& cmd) {
    auto model = load_model(cmd.model);
    auto test = load_dataset(cmd.test);
    if (test.columns != model.columns) throw DataError("test dataset columns do not match the model's schema");
    relabel(test, model.training_median);
    const auto& root = model.tree.nodes()[0];
    DecisionTreeModel marginal(root.n_short, root.n_long);

    Json report;
    report["provenance"] = provenance_json(cmd.prov);
    report["training_median"] = model.training_median;
    report["model"] = report_json(evaluate(model.tree, test.rows));
    report["model"]["leaves"] = model.tree.leaf_count();
    report["marginal"] = report_json(evaluate(marginal, test.rows));
    if (cmd.report_out) write_json(*cmd.report_out, report);
    return report;
}

// ---- cascade ---------------------------------------------------------------

Json cascade_command(const CascadeCommand& cmd) {
    auto train = load_dataset(cmd.train);
    std::optional<LabeledDataset> test;
    if (cmd.test) test = load_dataset(*cmd.test);
    auto levels = cascade_datasets(train, test ? &*test : nullptr, cmd.thresholds, cmd.min_size);

    Json report;
    report["provenance"] = provenance_json(cmd.prov);
    report["min_size"] = cmd.min_size;
    report["levels"] = Json::array();
    for (const auto& level : levels) {
        Json row;
        row["threshold"] = level.threshold;
        row["train_size"] = level.train_size;
        row["test_size"] = level.test_size;
        if (!level.train) {
            row["skipped"] = true;
            report["levels"].push_back(row);
            continue;
        }
        auto tuning = tune_kappa(level.train->rows, cmd.kappa_grid, cmd.seed);
        auto model = make_model_file(tuning.model, *level.train, tuning.kappa);
        Json mj = model_to_json(model);
        Json file;
        file["provenance"] = provenance_json(cmd.prov);
        file["threshold"] = level.threshold;
        for (auto& [k, v] : mj.items()) file[k] = v;
        write_json(cmd.out_dir / ("model_" + std::to_string(level.threshold) + ".json"), file);

        row["skipped"] = false;
        row["median"] = level.train->median;
        row["kappa"] = tuning.kappa;
        row["leaves"] = tuning.model.leaf_count();
        if (level.test && !level.test->rows.empty()) {
            auto marginal = marginal_model(level.train->rows);
            row["model"] = report_json(evaluate(tuning.model, level.test->rows));
            row["marginal"] = report_json(evaluate(marginal, level.test->rows));
        }
        report["levels"].push_back(row);
    }
    write_json(cmd.out_dir / "cascade.json", report);
    return report;
}

// ---- policy ----------------------------------------------------------------

PolicySpec parse_policy_spec(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("policy must look like kind:args");
    const auto kind = text.substr(0, colon);
    const auto args = text.substr(colon + 1);
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty()) throw std::invalid_argument("bad number '" + s + "' in policy " + text);
        return v;
    };
    PolicySpec spec;
    spec.text = text;
    try {
        if (kind == "fixed") {
            spec.policy = RestartPolicy::fixed(number(args));
        } else if (kind == "luby") {
            spec.policy = RestartPolicy::luby(number(args));
        } else if (kind == "dynamic") {
            auto comma = args.find(',');
            long observe = number(args.substr(0, comma));
            if (comma == std::string::npos) {
                spec.policy = RestartPolicy::dynamic(observe, std::nullopt);
                spec.scan_limit = true;
            } else {
                auto l = args.substr(comma + 1);
                spec.policy = RestartPolicy::dynamic(observe, l == "inf" ? std::nullopt : std::optional<long>(number(l)));
            }
        } else {
            throw std::invalid_argument("unknown policy kind '" + kind + "'");
        }
    } catch (const DataError& e) {
        throw std::invalid_argument(e.what());
    }
    return spec;
}

PolicyOutcome policy_command(const PolicyCommand& cmd) {
    auto rtd = load_rtd(cmd.rtd);
    PolicyOutcome out;
    Json& report = out.report;
    report["provenance"] = provenance_json(cmd.prov);
    report["rtd"] = {{"runs", rtd.size()}, {"unsolved", rtd.unsolved()}};
    if (auto m = rtd.quantile(0.5)) report["rtd"]["median"] = *m;

    RtdRunSource resample(rtd);
    auto best = optimal_fixed_cutoff(rtd);
    Json fixed;
    fixed["policy"] = "fixed:" + std::to_string(best.cutoff);
    fixed["kind"] = "optimal_fixed";
    fixed["cutoff"] = best.cutoff;
    fixed["analytic_expected"] = expectation_json(best.expected);
    if (!best.expected.unbounded) {
        fixed["simulated"] = stats_json(simulate_policy(resample, RestartPolicy::fixed(best.cutoff), nullptr, cmd.sim));
    } else {
        out.unbounded = true;
    }
    report["policies"] = Json::array();
    report["policies"].push_back(fixed);

    std::optional<ModelFile> model;
    std::optional<LabeledDataset> rows;
    if (cmd.model) {
        if (!cmd.dataset) throw DataError("a model predictor needs --dataset rows to resample");
        model = load_model(*cmd.model);
        rows = load_dataset(*cmd.dataset);
        if (rows->columns != model->columns) throw DataError("dataset columns do not match the model's schema");
    }

    for (const auto& spec : cmd.policies) {
        Json row;
        row["policy"] = spec.text;
        const auto& p = spec.policy;
        PolicyStats stats;
        switch (p.kind) {
            case RestartPolicy::Kind::Fixed:
                row["kind"] = "fixed";
                row["analytic_expected"] = expectation_json(expected_time_fixed(rtd, p.cutoff));
                stats = simulate_policy(resample, p, nullptr, cmd.sim);
                break;
            case RestartPolicy::Kind::Luby:
                row["kind"] = "luby";
                stats = simulate_policy(resample, p, nullptr, cmd.sim);
                break;
            case RestartPolicy::Kind::Dynamic: {
                row["kind"] = "dynamic";
                RestartPolicy policy = p;
                std::optional<double> accuracy = cmd.accuracy;
                if (model) {
                    if (p.observe != rows->horizon) {
                        throw DataError("with a model predictor the observation point must equal the dataset horizon (" +
                                        std::to_string(rows->horizon) + ")");
                    }
                    row["predictor"] = "model";
                } else {
                    if (!accuracy) throw DataError("dynamic policy needs --accuracy or a --model");
                    row["predictor"] = "synthetic";
                }
                if (spec.scan_limit) {
                    if (!accuracy) throw DataError("scanning L needs --accuracy");
                    auto scan = scan_dynamic_limits(rtd, p.observe, *accuracy);
                    if (scan.empty()) throw DataError("no RTD quantile lies above the observation point");
                    row["scan"] = Json::array();
                    for (const auto& c : scan) row["scan"].push_back({{"limit", c.limit}, {"total_ub", expectation_json(c.total_ub)}});
                    policy = RestartPolicy::dynamic(p.observe, scan.front().limit);
                }
                row["observe"] = policy.observe;
                row["limit"] = policy.limit ? Json(*policy.limit) : Json("inf");
                if (accuracy) {
                    const double p_o = rtd.cdf(policy.observe);
                    const double p_l = policy.limit ? rtd.cdf(*policy.limit)
                                                    : 1.0 - static_cast<double>(rtd.unsolved()) / rtd.size();
                    Json a;
                    a["accuracy"] = *accuracy;
                    a["p_observe"] = p_o;
                    a["p_limit"] = p_l;
                    a["expected_runs"] = expectation_json(dynamic_expected_runs(*accuracy, p_o, p_l));
                    if (policy.limit) {
                        a["run_length_ub"] = dynamic_expected_run_length_ub(policy.observe, *policy.limit, *accuracy, p_l);
                        a["total_ub"] =
                            expectation_json(dynamic_expected_total_ub(policy.observe, *policy.limit, *accuracy, p_o, p_l));
                    }
                    row["analytic"] = a;
                }
                if (model) {
                    DatasetRunSource source(rtd, *rows);
                    ModelPredictor predictor(model->tree);
                    stats = simulate_policy(source, policy, &predictor, cmd.sim);
                } else {
                    SyntheticPredictor predictor(*accuracy);
                    stats = simulate_policy(resample, policy, &predictor, cmd.sim);
                }
                break;
            }
        }
        row["simulated"] = stats_json(stats);
        if (stats.unbounded) out.unbounded = true;
        report["policies"].push_back(row);
    }
    report["unbounded"] = out.unbounded;
    if (cmd.report_out) write_json(*cmd.report_out, report);
    return out;
}

std::string format_policy_table(const Json& report) {
    std::ostringstream out;
    char line[200];
    std::snprintf(line, sizeof line, "%-24s %14s %14s %10s %12s\n", "policy", "analytic", "simulated", "+/-se",
                  "mean runs");
    out << line;
    for (const auto& row : report.at("policies")) {
        std::string analytic = "-";
        if (row.contains("analytic_expected")) {
            analytic = row["analytic_expected"].is_null() ? "UNBOUNDED" : format_double(row["analytic_expected"].get<double>());
        } else if (row.contains("analytic") && row["analytic"].contains("total_ub")) {
            const auto& ub = row["analytic"]["total_ub"];
            analytic = ub.is_null() ? "UNBOUNDED" : "<=" + format_double(ub.get<double>());
        }
        std::string sim = "-", se = "-", runs = "-";
        if (row.contains("simulated")) {
            const auto& s = row["simulated"];
            if (s["unbounded"].get<bool>()) {
                sim = "UNBOUNDED";
            } else {
                char b[64];
                std::snprintf(b, sizeof b, "%.1f", s["mean_cost"].get<double>());
                sim = b;
                std::snprintf(b, sizeof b, "%.1f", s["cost_se"].get<double>());
                se = b;
                std::snprintf(b, sizeof b, "%.3f", s["mean_runs"].get<double>());
                runs = b;
            }
        }
        if (analytic.size() > 14) analytic = analytic.substr(0, 14);
        std::snprintf(line, sizeof line, "%-24s %14s %14s %10s %12s\n", row["policy"].get<std::string>().c_str(),
                      analytic.c_str(), sim.c_str(), se.c_str(), runs.c_str());
        out << line;
    }
    return out.str();
}

// ---- report ----------------------------------------------------------------

Json report_command(const fs::path& path) {
    const auto text = read_text_file(path);
    Json out;
    out["file"] = path.filename().string();
    if (text.rfind("# rtlab rtd", 0) == 0) {
        std::istringstream in(text);
        auto rtd = read_rtd(in);
        out["kind"] = "rtd";
        out["runs"] = rtd.size();
        out["unsolved"] = rtd.unsolved();
        for (double q : {0.1, 0.5, 0.9}) {
            auto v = rtd.quantile(q);
            out["q" + std::to_string(static_cast<int>(q * 100))] = v ? Json(*v) : Json("inf");
        }
        out["max"] = rtd.unsolved() ? Json("inf") : Json(rtd.lengths().back());
        const double med = rtd_median(rtd);
        if (std::isfinite(med) && !rtd.lengths().empty()) {
            out["tail_ratio"] = static_cast<double>(rtd.lengths().back()) / std::max(med, 1.0);
        }
        auto best = optimal_fixed_cutoff(rtd);
        out["optimal_fixed"] = {{"cutoff", best.cutoff}, {"expected", expectation_json(best.expected)}};
    } else if (text.rfind("# rtlab dataset", 0) == 0) {
        std::istringstream in(text);
        auto data = read_dataset(in);
        out["kind"] = "dataset";
        out["rows"] = data.rows.size();
        out["short"] = data.short_count();
        out["censored"] = std::count_if(data.rows.begin(), data.rows.end(), [](const auto& r) { return r.x.censored; });
        out["median"] = data.median;
        out["horizon"] = data.horizon;
        out["columns"] = data.columns.size();
    } else {
        Json j;
        try {
            j = Json::parse(text);
        } catch (const nlohmann::json::exception&) {
            throw DataError("unrecognized file " + path.string());
        }
        if (j.value("kind", "") != "rtlab-model") throw DataError("unrecognized JSON file " + path.string());
        auto m = model_from_json(j);
        out["kind"] = "model";
        out["leaves"] = m.tree.leaf_count();
        out["depth"] = m.tree.depth();
        out["kappa"] = m.kappa;
        out["training_median"] = m.training_median;
        std::vector<std::string> used;
        for (const auto& node : m.tree.nodes()) {
            if (!node.is_leaf()) used.push_back(m.columns[node.feature]);
        }
        std::sort(used.begin(), used.end());
        used.erase(std::unique(used.begin(), used.end()), used.end());
        out["features_used"] = used;
    }
    return out;
}

}  // namespace rtlab
