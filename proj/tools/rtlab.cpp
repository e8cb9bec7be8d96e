// rtlab: generate quasigroup-with-holes instances, record solver runs, learn
// run-time predictors and compare restart policies.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "rtlab/commands.hpp"
#include "rtlab/errors.hpp"
#include "rtlab/parallel.hpp"

using namespace rtlab;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitUnbounded = 3;

// Options that do not change any output byte are left out of the recorded invocation.
const std::set<std::string> kUnrecorded = {"--threads", "--out", "--out-dir", "--model-out", "--report"};

std::string invocation(const CLI::App& sub) {
    std::string text = sub.get_name();
    for (const auto* opt : sub.get_options()) {
        if (opt->count() == 0 || opt->get_lnames().empty()) continue;
        const std::string name = "--" + opt->get_lnames().front();
        if (kUnrecorded.count(name)) continue;
        text += " " + name;
        for (const auto& r : opt->results()) text += " " + r;
    }
    return text;
}

struct InstanceFlags {
    int order = 18;
    int holes = 144;
    bool balanced = false;
    std::string instance;

    void add(CLI::App* app, bool allow_file) {
        app->add_option("--order", order, "Latin square order")->check(CLI::Range(1, kMaxOrder));
        app->add_option("--holes", holes, "total number of holes")->check(CLI::NonNegativeNumber);
        app->add_flag("--balanced", balanced, "same number of holes in every row and column");
        if (allow_file) app->add_option("--instance", instance, "instance file instead of a generated one");
    }
    HoleSpec spec() const {
        if (!balanced) return HoleSpec::unbalanced(holes);
        if (holes % order) throw CLI::ValidationError("--holes", "balanced holes must be a multiple of the order");
        return HoleSpec::balanced(holes / order);
    }
};

struct SolverFlags {
    long cutoff = 0;
    std::string propagation = "regin";

    void add(CLI::App* app, const char* cutoff_help) {
        app->add_option("--cutoff", cutoff, cutoff_help)->check(CLI::PositiveNumber);
        app->add_option("--propagation", propagation, "forward-check | regin")
            ->check(CLI::IsMember({"forward-check", "regin"}));
    }
    SolverConfig config() const {
        SolverConfig c;
        if (cutoff > 0) c.cutoff = cutoff;
        c.propagation = propagation == "regin" ? PropagationLevel::AlldiffRegin : PropagationLevel::ForwardCheck;
        return c;
    }
};

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            double v = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--kappa-grid", "bad value '" + item + "'");
        }
    }
    if (out.empty()) throw CLI::ValidationError("--kappa-grid", "empty grid");
    return out;
}

std::vector<long> parse_thresholds(const std::string& text) {
    std::vector<long> out;
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            long v = std::stol(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--thresholds", "bad value '" + item + "'");
        }
    }
    return out;
}

PartialLatinSquare load_instance(const std::string& path) {
    std::istringstream in(read_text_file(path));
    return read_instance(in);
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty()) std::cout << text;
    else write_text_file(out, text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Run-time prediction and restart-policy lab for Latin-square completion"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    std::uint64_t seed = 1;
    int threads = 1;
    std::string out;

    // generate
    auto* gen = app.add_subcommand("generate", "write a quasigroup-with-holes instance");
    InstanceFlags gen_inst;
    gen_inst.add(gen, false);
    gen->add_option("--seed", seed);
    gen->add_option("--out", out, "instance file (stdout when absent)");

    // solve
    auto* sol = app.add_subcommand("solve", "run the randomized solver without restarts");
    InstanceFlags sol_inst;
    sol_inst.add(sol, true);
    SolverFlags sol_flags;
    sol_flags.add(sol, "choice-point cutoff per run");
    std::size_t sol_runs = 1;
    sol->add_option("--seed", seed);
    sol->add_option("--runs", sol_runs, "independent runs")->check(CLI::PositiveNumber);
    sol->add_option("--threads", threads)->check(CLI::PositiveNumber);
    sol->add_option("--out", out, "JSON result (stdout when absent)");

    // dataset
    auto* ds = app.add_subcommand("dataset", "record runs and write train/test datasets and the RTD");
    InstanceFlags ds_inst;
    ds_inst.add(ds, true);
    SolverFlags ds_flags;
    ds_flags.add(ds, "safety cap; capped runs are kept as censored LONG rows");
    std::string ds_mode = "single";
    std::size_t ds_runs = 4000, ds_test = 1000;
    int ds_horizon = 10;
    bool split_var = false, second = false, peak = false;
    std::size_t peak_runs = 100;
    long peak_cutoff = 100000;
    std::string out_dir = ".";
    ds->add_option("--mode", ds_mode, "single | multi")->check(CLI::IsMember({"single", "multi"}));
    ds->add_option("--seed", seed);
    ds->add_option("--runs", ds_runs, "training runs")->check(CLI::PositiveNumber);
    ds->add_option("--test-runs", ds_test, "test runs")->check(CLI::NonNegativeNumber);
    ds->add_option("--horizon", ds_horizon, "observation horizon in choice points")->check(CLI::Range(2, 1 << 30));
    ds->add_flag("--split-line-variance", split_var, "separate row and column hole-count variances");
    ds->add_flag("--second-differences", second, "add second-difference statistics");
    ds->add_flag("--peak-search", peak, "probe up to 20 instances for a heavy-tailed one");
    ds->add_option("--peak-probe-runs", peak_runs)->check(CLI::PositiveNumber);
    ds->add_option("--peak-cutoff", peak_cutoff, "cap for probe runs")->check(CLI::PositiveNumber);
    ds->add_option("--threads", threads)->check(CLI::PositiveNumber);
    ds->add_option("--out-dir", out_dir);

    // train
    auto* tr = app.add_subcommand("train", "tune kappa and grow the decision tree");
    std::string tr_data, tr_model, tr_report, kappa_grid;
    tr->add_option("--train", tr_data)->required();
    tr->add_option("--kappa-grid", kappa_grid, "comma-separated kappa values");
    tr->add_option("--seed", seed);
    tr->add_option("--model-out", tr_model)->required();
    tr->add_option("--report", tr_report, "tuning report (JSON)");

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate a model and the marginal baseline");
    std::string ev_model, ev_test, ev_report;
    ev->add_option("--model", ev_model)->required();
    ev->add_option("--test", ev_test)->required();
    ev->add_option("--report", ev_report, "JSON report (stdout when absent)");

    // cascade
    auto* ca = app.add_subcommand("cascade", "models for runs that outlast each threshold");
    std::string ca_train, ca_test, ca_thresholds;
    std::size_t ca_min = 50;
    ca->add_option("--train", ca_train)->required();
    ca->add_option("--test", ca_test);
    ca->add_option("--thresholds", ca_thresholds, "ascending, comma-separated")->required();
    ca->add_option("--kappa-grid", kappa_grid);
    ca->add_option("--min-size", ca_min)->check(CLI::PositiveNumber);
    ca->add_option("--seed", seed);
    ca->add_option("--out-dir", out_dir);

    // policy
    auto* po = app.add_subcommand("policy", "compare restart policies on an RTD");
    std::string po_rtd, po_model, po_dataset, po_report;
    std::vector<std::string> po_policies;
    double accuracy = -1;
    std::size_t trials = 10000;
    std::uint64_t budget = 1'000'000;
    po->add_option("--rtd", po_rtd)->required();
    po->add_option("--policy", po_policies, "fixed:C | luby:S | dynamic:O,L (repeatable)")
        ->check([](const std::string& s) {
            try {
                parse_policy_spec(s);
            } catch (const std::exception& e) {
                return std::string(e.what());
            }
            return std::string();
        });
    po->add_option("--accuracy", accuracy, "synthetic predictor accuracy")->check(CLI::Range(0.0, 1.0));
    po->add_option("--model", po_model, "trained model for live prediction");
    po->add_option("--dataset", po_dataset, "dataset rows resampled with the model");
    po->add_option("--trials", trials)->check(CLI::PositiveNumber);
    po->add_option("--run-budget", budget, "runs per trial before UNBOUNDED")->check(CLI::PositiveNumber);
    po->add_option("--seed", seed);
    po->add_option("--threads", threads)->check(CLI::PositiveNumber);
    po->add_option("--report", po_report, "JSON report");

    // report
    auto* re = app.add_subcommand("report", "summarize an RTD, dataset or model file");
    std::string re_file;
    re->add_option("file", re_file)->required();
    re->add_option("--out", out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        auto* sub = app.get_subcommands().front();
        const Provenance prov{invocation(*sub), Seed{seed}};

        if (sub == gen) {
            auto inst = experiment_instance(gen_inst.order, gen_inst.spec(), Seed{seed}, 0);
            std::ostringstream text;
            write_instance(text, inst, prov);
            emit(out, text.str());
        } else if (sub == sol) {
            auto inst = sol_inst.instance.empty()
                            ? experiment_instance(sol_inst.order, sol_inst.spec(), Seed{seed}, 0)
                            : load_instance(sol_inst.instance);
            std::vector<RunRecord> runs(sol_runs);
            const auto config = sol_flags.config();
            parallel_for(sol_runs, threads, [&](std::size_t i) { runs[i] = solve(inst, config, derive_seed(Seed{seed}, i)); });
            Json j;
            j["provenance"] = provenance_json(prov);
            j["order"] = inst.order();
            j["holes"] = inst.hole_count();
            j["runs"] = Json::array();
            for (const auto& r : runs) {
                const char* outcome = r.solved() ? "SOLVED" : r.outcome == Outcome::Cutoff ? "CUTOFF" : "EXHAUSTED";
                j["runs"].push_back({{"seed", r.seed.value}, {"outcome", outcome}, {"choice_points", r.choice_points}});
            }
            if (sol_runs == 1 && runs[0].assignment) {
                std::ostringstream grid;
                write_instance(grid, *runs[0].assignment);
                j["completion"] = grid.str();
            }
            emit(out, j.dump(2) + "\n");
        } else if (sub == ds) {
            DatasetCommand cmd;
            auto& spec = cmd.spec;
            spec.mode = ds_mode == "single" ? ExperimentMode::SingleInstance : ExperimentMode::MultiInstance;
            spec.order = ds_inst.order;
            spec.holes = ds_inst.spec();
            if (!ds_inst.instance.empty()) {
                if (spec.mode != ExperimentMode::SingleInstance) throw CLI::ValidationError("--instance", "only in single mode");
                spec.instance = load_instance(ds_inst.instance);
            }
            spec.train_runs = ds_runs;
            spec.test_runs = ds_test;
            spec.solver = ds_flags.config();
            spec.solver.horizon = ds_horizon;
            spec.solver.instrument = {split_var, second};
            spec.seed = Seed{seed};
            spec.threads = threads;
            cmd.peak_search = peak;
            cmd.peak_probe_runs = peak_runs;
            cmd.peak_probe_cutoff = peak_cutoff;
            cmd.out_dir = out_dir;
            cmd.prov = prov;
            auto report = dataset_command(cmd);
            std::cerr << "train: " << report["train"].dump() << "\ntest: " << report["test"].dump() << "\n";
        } else if (sub == tr) {
            TrainCommand cmd;
            cmd.train = tr_data;
            if (!kappa_grid.empty()) cmd.kappa_grid = parse_grid(kappa_grid);
            cmd.seed = Seed{seed};
            cmd.model_out = tr_model;
            if (!tr_report.empty()) cmd.report_out = tr_report;
            cmd.prov = prov;
            auto report = train_command(cmd);
            std::cerr << "kappa " << report["tuning"]["kappa"].get<double>() << ", "
                      << report["tuning"]["leaves"].get<int>() << " leaves\n";
        } else if (sub == ev) {
            EvalCommand cmd{ev_model, ev_test, std::nullopt, prov};
            if (!ev_report.empty()) cmd.report_out = ev_report;
            auto report = eval_command(cmd);
            if (ev_report.empty()) std::cout << report.dump(2) << "\n";
        } else if (sub == ca) {
            CascadeCommand cmd;
            cmd.train = ca_train;
            if (!ca_test.empty()) cmd.test = ca_test;
            cmd.thresholds = parse_thresholds(ca_thresholds);
            if (!kappa_grid.empty()) cmd.kappa_grid = parse_grid(kappa_grid);
            cmd.min_size = ca_min;
            cmd.seed = Seed{seed};
            cmd.out_dir = out_dir;
            cmd.prov = prov;
            auto report = cascade_command(cmd);
            for (const auto& level : report["levels"]) {
                if (level["skipped"].get<bool>()) {
                    std::cerr << "threshold " << level["threshold"] << ": skipped, " << level["train_size"]
                              << " training rows\n";
                }
            }
        } else if (sub == po) {
            PolicyCommand cmd;
            cmd.rtd = po_rtd;
            for (const auto& p : po_policies) cmd.policies.push_back(parse_policy_spec(p));
            if (accuracy >= 0) cmd.accuracy = accuracy;
            if (!po_model.empty()) cmd.model = po_model;
            if (!po_dataset.empty()) cmd.dataset = po_dataset;
            cmd.sim.trials = trials;
            cmd.sim.seed = Seed{seed};
            cmd.sim.run_budget = budget;
            cmd.sim.threads = threads;
            if (!po_report.empty()) cmd.report_out = po_report;
            cmd.prov = prov;
            auto result = policy_command(cmd);
            std::cout << format_policy_table(result.report);
            if (result.unbounded) {
                std::cerr << "UNBOUNDED: a policy cannot succeed on this RTD\n";
                return kExitUnbounded;
            }
        } else if (sub == re) {
            emit(out, report_command(re_file).dump(2) + "\n");
        }
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
