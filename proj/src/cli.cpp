#include "cpm/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "cpm/error.hpp"
#include "cpm/evaluation.hpp"
#include "cpm/io.hpp"

namespace cpm::cli {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ValidationError("config: '" + (path.empty() ? "<root>" : path) + "' must be an object");
    for (const auto& [key, _] : obj.items()) {
        const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        if (!ok) throw ValidationError("config: unknown key '" + (path.empty() ? key : path + "." + key) + "'");
    }
}

template <class T>
void take(const json& obj, const std::string& path, const char* key, T& dst) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        dst = it->get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config: bad value for '" + (path.empty() ? std::string(key) : path + "." + key) + "'");
    }
}

void take_path(const json& obj, const std::string& path, const char* key, std::filesystem::path& dst) {
    std::string s;
    if (obj.contains(key)) {
        take(obj, path, key, s);
        dst = s;
    }
}

}  // namespace

void RunConfig::validate() const {
    if (jobs < 1) throw ValidationError("jobs must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ValidationError("cpm.train_fraction must be in (0, 1)");
    dataset.validate();
    cpm.validate();
    if (sweep_delta_ws.empty() || sweep_spans.empty()) throw ValidationError("sweep grid must not be empty");
    for (int v : sweep_delta_ws)
        if (v < 1) throw ValidationError("sweep.delta_ws entries must be >= 1");
    for (int v : sweep_spans)
        if (v < 1) throw ValidationError("sweep.spans entries must be >= 1");
}

void apply_config_json(RunConfig& cfg, const json& j) {
    check_keys(j, "", {"seed", "out", "jobs", "quiet", "market", "randomization", "dataset", "cpm", "sampler",
                       "sweep", "paths"});
    take(j, "", "seed", cfg.seed);
    take_path(j, "", "out", cfg.out);
    take(j, "", "jobs", cfg.jobs);
    take(j, "", "quiet", cfg.quiet);

    if (j.contains("market")) {
        const auto& m = j["market"];
        check_keys(m, "market", {"rho", "tol", "horizon", "lambda0"});
        take(m, "market", "rho", cfg.dataset.market.rho);
        take(m, "market", "tol", cfg.dataset.market.tol);
        take(m, "market", "horizon", cfg.dataset.market.horizon);
        take(m, "market", "lambda0", cfg.dataset.market.lambda0);
    }
    if (j.contains("randomization")) {
        const auto& r = j["randomization"];
        auto& d = cfg.dataset.randomization;
        check_keys(r, "randomization", {"n_prosumers", "a_min", "a_max", "c_min", "c_max", "p_min", "p_max",
                                        "contraction_min", "contraction_max"});
        take(r, "randomization", "n_prosumers", d.n_prosumers);
        take(r, "randomization", "a_min", d.a_min);
        take(r, "randomization", "a_max", d.a_max);
        take(r, "randomization", "c_min", d.c_min);
        take(r, "randomization", "c_max", d.c_max);
        take(r, "randomization", "p_min", d.p_min);
        take(r, "randomization", "p_max", d.p_max);
        take(r, "randomization", "contraction_min", d.contraction_min);
        take(r, "randomization", "contraction_max", d.contraction_max);
    }
    if (j.contains("dataset")) {
        const auto& d = j["dataset"];
        check_keys(d, "dataset", {"protocol", "n_traces", "attacked_fraction"});
        std::string protocol;
        take(d, "dataset", "protocol", protocol);
        if (!protocol.empty()) cfg.dataset.protocol = protocol_from_string(protocol);
        take(d, "dataset", "n_traces", cfg.dataset.n_traces);
        take(d, "dataset", "attacked_fraction", cfg.dataset.attacked_fraction);
    }
    if (j.contains("cpm")) {
        const auto& c = j["cpm"];
        check_keys(c, "cpm", {"delta_w", "n_models", "threshold", "features", "epsilon", "train_fraction"});
        take(c, "cpm", "delta_w", cfg.cpm.delta_w);
        take(c, "cpm", "n_models", cfg.cpm.n_models);
        take(c, "cpm", "threshold", cfg.cpm.threshold);
        std::string features;
        take(c, "cpm", "features", features);
        if (!features.empty()) cfg.cpm.feature_mode = feature_mode_from_string(features);
        take(c, "cpm", "epsilon", cfg.cpm.epsilon);
        take(c, "cpm", "train_fraction", cfg.train_fraction);
    }
    if (j.contains("sampler")) {
        const auto& s = j["sampler"];
        check_keys(s, "sampler", {"n_burn", "n_keep", "thin", "bias_variance"});
        take(s, "sampler", "n_burn", cfg.cpm.sampler.n_burn);
        take(s, "sampler", "n_keep", cfg.cpm.sampler.n_keep);
        take(s, "sampler", "thin", cfg.cpm.sampler.thin);
        take(s, "sampler", "bias_variance", cfg.cpm.sampler.bias_variance);
    }
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        check_keys(s, "sweep", {"delta_ws", "spans"});
        take(s, "sweep", "delta_ws", cfg.sweep_delta_ws);
        take(s, "sweep", "spans", cfg.sweep_spans);
    }
    if (j.contains("paths")) {
        const auto& p = j["paths"];
        check_keys(p, "paths", {"data", "test_data", "model", "report_input"});
        take_path(p, "paths", "data", cfg.data_dir);
        take_path(p, "paths", "test_data", cfg.test_data_dir);
        take_path(p, "paths", "model", cfg.model_dir);
        take_path(p, "paths", "report_input", cfg.report_input);
    }
}

RunConfig load_run_config(const std::filesystem::path& path) {
    RunConfig cfg;
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ValidationError("cannot parse config " + path.string() + ": " + e.what());
    }
    apply_config_json(cfg, j);
    return cfg;
}

json result_config_json(const RunConfig& cfg) {
    DatasetConfig d = cfg.dataset;
    d.master_seed = cfg.seed;
    return {{"seed", cfg.seed},
            {"dataset", to_json(d)},
            {"cpm", to_json(cfg.cpm)},
            {"train_fraction", cfg.train_fraction},
            {"sweep", {{"delta_ws", cfg.sweep_delta_ws}, {"spans", cfg.sweep_spans}}}};
}

std::string config_hash(const RunConfig& cfg) { return hex64(fnv1a64(result_config_json(cfg).dump())); }

std::uint64_t split_seed(std::uint64_t master) { return derive_seed(master, 0x5B17ULL); }
std::uint64_t sampler_seed(std::uint64_t master) { return derive_seed(master, 0x6188ULL); }

namespace {

struct Context {
    const RunConfig& cfg;
    std::ostream& out;
    bool out_explicit;

    Provenance provenance() const { return {.config_hash = config_hash(cfg), .master_seed = cfg.seed}; }
    std::ostream& log() const {
        static std::ostream null(nullptr);
        return cfg.quiet ? null : out;
    }
};

std::string fixed(double v, int digits = 4) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << v;
    return ss.str();
}

void require_dir(const std::filesystem::path& p, const char* what) {
    if (p.empty()) throw ValidationError(std::string("missing --") + what);
}

struct Selection {
    std::vector<NegotiationTrace> train;
    std::vector<NegotiationTrace> test;
    std::string dataset_id;
};

Selection select_train_test(const RunConfig& cfg) {
    require_dir(cfg.data_dir, "data");
    const Dataset ds = read_dataset(cfg.data_dir);
    Selection sel;
    if (!cfg.test_data_dir.empty()) {
        const Dataset test = read_dataset(cfg.test_data_dir);
        sel.train = ds.traces;
        sel.test = test.traces;
        sel.dataset_id = dataset_id(test.config);
    } else {
        auto split = stratified_split(ds.traces, cfg.train_fraction, split_seed(cfg.seed));
        sel.train = std::move(split.train);
        sel.test = std::move(split.test);
        sel.dataset_id = dataset_id(ds.config);
    }
    return sel;
}

void print_grid(std::ostream& os, const MetricsReport& report, const char* title, double MetricsCell::*field) {
    std::set<int> dws, spans;
    for (const auto& c : report.cells) {
        dws.insert(c.delta_w);
        spans.insert(c.span);
    }
    os << title << "\n  dw \\ span";
    for (int s : spans) os << std::setw(8) << s;
    os << "\n";
    for (int dw : dws) {
        os << std::setw(11) << dw;
        for (int s : spans) {
            const auto* c = report.find(dw, s);
            os << std::setw(8) << (c ? fixed(c->*field, 3) : std::string("-"));
        }
        os << "\n";
    }
}

int cmd_generate(const Context& ctx) {
    DatasetConfig dc = ctx.cfg.dataset;
    dc.master_seed = ctx.cfg.seed;
    const Dataset ds = generate_dataset(dc, ctx.cfg.jobs);
    write_dataset(ds, ctx.cfg.out, ctx.provenance());

    int attacked = 0, converged = 0, start_lo = dc.market.horizon, start_hi = -1;
    for (const auto& t : ds.traces) {
        if (t.attack) {
            ++attacked;
            start_lo = std::min(start_lo, t.attack->start_iter);
            start_hi = std::max(start_hi, t.attack->start_iter);
        }
        converged += t.converged ? 1 : 0;
    }
    auto& log = ctx.log();
    log << "generated " << ds.traces.size() << " traces (" << to_string(dc.protocol) << "): " << attacked
        << " attacked, " << ds.traces.size() - static_cast<std::size_t>(attacked) << " safe, " << converged
        << " converged\n";
    if (attacked > 0) log << "attack start iterations in [" << start_lo << ", " << start_hi << "]\n";
    log << "dataset " << dataset_id(dc) << " -> " << ctx.cfg.out.string() << "\n";
    return kExitOk;
}

int cmd_train(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    require_dir(cfg.data_dir, "data");
    const Dataset ds = read_dataset(cfg.data_dir);
    if (cfg.cpm.span() > ds.config.market.horizon)
        throw WindowExceedsHorizon("span " + std::to_string(cfg.cpm.span()) + " > horizon " +
                                   std::to_string(ds.config.market.horizon));
    const auto split = stratified_split(ds.traces, cfg.train_fraction, split_seed(cfg.seed));
    CpmConfig cc = cfg.cpm;
    cc.sampler.seed = sampler_seed(cfg.seed);
    const CpmEnsemble ens = fit_cpm(split.train, cc, cfg.jobs);

    json test_ids = json::array();
    for (const auto& t : split.test) test_ids.push_back(t.trace_id);
    const json metadata = {{"dataset_id", dataset_id(ds.config)},
                           {"train_fraction", cfg.train_fraction},
                           {"split_seed", split_seed(cfg.seed)},
                           {"n_train", split.train.size()},
                           {"n_test", split.test.size()},
                           {"test_trace_ids", test_ids}};
    write_ensemble(ens, cfg.out, ctx.provenance(), metadata);
    ctx.log() << "trained " << ens.models.size() << " models (delta_w=" << cc.delta_w << ", span D=" << cc.span()
              << ") on " << split.train.size() << " traces -> " << cfg.out.string() << "\n";
    return kExitOk;
}

std::vector<NegotiationTrace> evaluation_traces(const RunConfig& cfg, const EnsembleFiles& files,
                                                std::string& id_out) {
    if (!cfg.test_data_dir.empty()) {
        const Dataset test = read_dataset(cfg.test_data_dir);
        id_out = dataset_id(test.config);
        return test.traces;
    }
    require_dir(cfg.data_dir, "data");
    const Dataset ds = read_dataset(cfg.data_dir);
    id_out = dataset_id(ds.config);
    const bool same = files.metadata.is_object() && files.metadata.value("dataset_id", std::string()) == id_out;
    if (!same || cfg.all_traces) return ds.traces;
    std::set<std::string> ids;
    for (const auto& id : files.metadata.at("test_trace_ids")) ids.insert(id.get<std::string>());
    std::vector<NegotiationTrace> out;
    for (const auto& t : ds.traces)
        if (ids.count(t.trace_id)) out.push_back(t);
    return out;
}

int cmd_predict(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    require_dir(cfg.model_dir, "model");
    const EnsembleFiles files = read_ensemble(cfg.model_dir);
    const CpmEnsemble& ens = files.ensemble;
    std::string id;
    std::vector<NegotiationTrace> traces = evaluation_traces(cfg, files, id);
    if (!cfg.trace_id.empty()) {
        if (!cfg.data_dir.empty() && cfg.test_data_dir.empty()) traces = read_dataset(cfg.data_dir).traces;
        std::erase_if(traces, [&](const NegotiationTrace& t) { return t.trace_id != cfg.trace_id; });
        if (traces.empty()) throw ValidationError("trace '" + cfg.trace_id + "' not found");
    }

    std::string csv = ctx.provenance().csv_comment({{"dataset_id", id}, {"fingerprint", files.fingerprint}});
    csv += "trace_id,m,iteration,p,decision\n";
    auto row = [&](const std::string& tid, int m, int iteration, double p, int decision) {
        csv += tid + "," + std::to_string(m) + "," + std::to_string(iteration) + "," + format_double(p) + "," +
               std::to_string(decision) + "\n";
    };
    for (const auto& t : traces) {
        if (static_cast<int>(t.gaps.size()) < ens.config.span())
            throw DimensionMismatch("trace " + t.trace_id + " is shorter than the ensemble span");
        if (cfg.incremental) {
            StreamingPredictor sp(ens);
            for (double g : t.gaps)
                if (auto e = sp.push(g)) row(t.trace_id, e->m, e->iteration, e->probability, e->decision);
        } else {
            const auto probs = probability_sequence(ens, t);
            for (std::size_t i = 0; i < probs.size(); ++i) {
                const int m = static_cast<int>(i) + 1;
                row(t.trace_id, m, m * ens.config.delta_w, probs[i], decide(probs[i], ens.config.threshold));
            }
        }
    }
    if (ctx.out_explicit) {
        write_file_atomic(cfg.out / "predictions.csv", csv);
        ctx.log() << "wrote predictions for " << traces.size() << " traces -> "
                  << (cfg.out / "predictions.csv").string() << "\n";
    } else {
        ctx.out << csv;
    }
    return kExitOk;
}

int cmd_evaluate(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    require_dir(cfg.model_dir, "model");
    const EnsembleFiles files = read_ensemble(cfg.model_dir);
    std::string id;
    const auto test = evaluation_traces(cfg, files, id);
    MetricsReport report = evaluate_ensemble(files.ensemble, test);
    report.dataset_id = id;
    report.fingerprint = files.fingerprint;
    const auto fps = false_positive_report(files.ensemble, test);
    const std::vector<int> fp_dw(fps.size(), files.ensemble.config.delta_w);

    const Provenance prov = ctx.provenance();
    write_file_atomic(cfg.out / "metrics_grid.csv", metrics_grid_csv(report, prov));
    write_file_atomic(cfg.out / "metrics_long.csv", metrics_long_csv(report, prov));
    write_file_atomic(cfg.out / "false_positives.csv", false_positive_csv(fps, prov, fp_dw));

    auto& log = ctx.log();
    log << "evaluated " << test.size() << " traces (" << id << ")\n";
    log << "  span      fpr      fnr      mcc\n";
    for (const auto& c : report.cells)
        log << std::setw(6) << c.span << " " << std::setw(8) << fixed(c.fpr) << " " << std::setw(8) << fixed(c.fnr)
            << " " << std::setw(8) << fixed(c.mcc) << "\n";
    log << fps.size() << " false positives at span " << files.ensemble.config.span() << " -> " << cfg.out.string()
        << "\n";
    return kExitOk;
}

int cmd_sweep(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const Selection sel = select_train_test(cfg);
    CpmConfig base = cfg.cpm;
    base.sampler.seed = sampler_seed(cfg.seed);
    const int horizon = sel.train.empty() ? 0 : static_cast<int>(sel.train.front().gaps.size());
    for (int s : cfg.sweep_spans)
        if (s > horizon)
            throw WindowExceedsHorizon("sweep span " + std::to_string(s) + " > horizon " + std::to_string(horizon));

    SweepResult result = sweep(sel.train, sel.test, cfg.sweep_delta_ws, cfg.sweep_spans, base, cfg.jobs);
    const Provenance prov = ctx.provenance();
    std::string fp_hash;
    std::vector<FalsePositiveRecord> fps;
    std::vector<int> fp_dw;
    for (const auto& ens : result.ensembles) {
        fp_hash += ensemble_fingerprint(ens, prov);
        for (auto& r : false_positive_report(ens, sel.test)) {
            fps.push_back(std::move(r));
            fp_dw.push_back(ens.config.delta_w);
        }
    }
    result.report.dataset_id = sel.dataset_id;
    result.report.fingerprint = hex64(fnv1a64(fp_hash));

    write_file_atomic(cfg.out / "sweep_grid.csv", metrics_grid_csv(result.report, prov));
    write_file_atomic(cfg.out / "sweep_long.csv", metrics_long_csv(result.report, prov));
    write_file_atomic(cfg.out / "false_positives.csv", false_positive_csv(fps, prov, fp_dw));

    auto& log = ctx.log();
    log << "sweep over " << result.report.cells.size() << " cells, train " << sel.train.size() << " / test "
        << sel.test.size() << " traces\n";
    print_grid(log, result.report, "MCC", &MetricsCell::mcc);
    log << "-> " << cfg.out.string() << "\n";
    return kExitOk;
}

int cmd_report(const Context& ctx) {
    std::filesystem::path in = ctx.cfg.report_input;
    if (in.empty()) throw ValidationError("missing --in");
    if (std::filesystem::is_directory(in)) {
        if (std::filesystem::exists(in / "sweep_long.csv"))
            in /= "sweep_long.csv";
        else
            in /= "metrics_long.csv";
    }
    const MetricsReport report = parse_metrics_long_csv(read_file(in));
    ctx.out << "report " << in.string() << " (dataset " << report.dataset_id << ")\n";
    print_grid(ctx.out, report, "MCC", &MetricsCell::mcc);
    print_grid(ctx.out, report, "FPR (attacks passed as safe)", &MetricsCell::fpr);
    print_grid(ctx.out, report, "FNR (safe markets flagged)", &MetricsCell::fnr);
    return kExitOk;
}

int exit_code_for(ErrorClass cls) {
    switch (cls) {
        case ErrorClass::Validation: return kExitValidation;
        case ErrorClass::Io: return kExitIo;
        case ErrorClass::Computation: return kExitComputation;
    }
    return kExitComputation;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Convergence predictor for consensus market clearing"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir, protocol, features, data, test_data, model, trace, report_in;
    std::uint64_t seed = 0;
    int jobs = 1, n_traces = 0, horizon = 0, delta_w = 0, n_models = 0, span = 0, n_burn = -1, n_keep = 0, thin = 0;
    double attacked_fraction = -1, rho = 0, threshold = 0, train_fraction = 0;
    std::vector<int> delta_ws, spans;
    bool quiet = false, incremental = false, all = false;

    auto* o_config = app.add_option("--config", config_path, "JSON config file");
    auto* o_seed = app.add_option("--seed", seed, "master seed");
    auto* o_out = app.add_option("--out", out_dir, "output directory");
    auto* o_jobs = app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--quiet", quiet, "suppress summaries");

    auto* gen = app.add_subcommand("generate", "simulate a labelled dataset of negotiation traces");
    auto* o_protocol = gen->add_option("--protocol", protocol, "data1 (attacks from iteration 0) or data2 (15..55)");
    auto* o_n = gen->add_option("--n", n_traces, "number of traces");
    auto* o_af = gen->add_option("--attacked-fraction", attacked_fraction, "fraction of attacked traces");
    auto* o_horizon = gen->add_option("--horizon", horizon, "iterations per trace");
    auto* o_rho = gen->add_option("--rho", rho, "price step size");

    auto* train = app.add_subcommand("train", "fit the elongating-window ensemble on a dataset's training split");
    auto* predict = app.add_subcommand("predict", "emit P_m for each trace and window");
    auto* evaluate = app.add_subcommand("evaluate", "confusion metrics and false-positive forensics");
    auto* sweep_cmd = app.add_subcommand("sweep", "delta_w x span sensitivity grid");
    auto* report = app.add_subcommand("report", "print metric grids from a long-format metrics CSV");

    for (auto* sub : {train, predict, evaluate, sweep_cmd}) sub->add_option("--data", data, "dataset directory");
    for (auto* sub : {predict, evaluate, sweep_cmd}) sub->add_option("--test-data", test_data, "separate test dataset");
    for (auto* sub : {predict, evaluate}) sub->add_option("--model", model, "model directory");
    predict->add_option("--trace", trace, "single trace id");
    predict->add_flag("--incremental", incremental, "replay each trace one iteration at a time");
    for (auto* sub : {predict, evaluate}) sub->add_flag("--all", all, "use every trace, not only the test split");
    report->add_option("--in", report_in, "metrics CSV or directory");

    std::vector<CLI::Option*> o_dw, o_models, o_span, o_burn, o_keep, o_thin, o_thr, o_feat, o_tf;
    for (auto* sub : {train, sweep_cmd}) {
        o_burn.push_back(sub->add_option("--n-burn", n_burn, "burn-in sweeps"));
        o_keep.push_back(sub->add_option("--n-keep", n_keep, "retained samples"));
        o_thin.push_back(sub->add_option("--thin", thin, "thinning"));
        o_thr.push_back(sub->add_option("--threshold", threshold, "decision threshold"));
        o_feat.push_back(sub->add_option("--features", features, "log or raw"));
        o_tf.push_back(sub->add_option("--train-fraction", train_fraction, "training share of each class"));
    }
    o_dw.push_back(train->add_option("--delta-w", delta_w, "window step"));
    o_models.push_back(train->add_option("--models", n_models, "number of models M"));
    o_span.push_back(train->add_option("--span", span, "total span M*delta_w"));
    auto* o_dws = sweep_cmd->add_option("--delta-ws", delta_ws, "window steps")->delimiter(',');
    auto* o_spans = sweep_cmd->add_option("--spans", spans, "spans")->delimiter(',');

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    auto given = [](const std::vector<CLI::Option*>& opts) {
        return std::any_of(opts.begin(), opts.end(), [](CLI::Option* o) { return o->count() > 0; });
    };

    try {
        RunConfig cfg;
        bool out_explicit = false;
        if (o_config->count()) {
            const json j = json::parse(read_file(config_path), nullptr, false);
            if (j.is_discarded()) throw ValidationError("cannot parse config " + config_path);
            apply_config_json(cfg, j);
            out_explicit = j.contains("out");
        }
        if (o_seed->count()) cfg.seed = seed;
        if (o_out->count()) {
            cfg.out = out_dir;
            out_explicit = true;
        }
        if (o_jobs->count()) cfg.jobs = jobs;
        if (quiet) cfg.quiet = true;
        if (o_protocol->count()) cfg.dataset.protocol = protocol_from_string(protocol);
        if (o_n->count()) cfg.dataset.n_traces = n_traces;
        if (o_af->count()) cfg.dataset.attacked_fraction = attacked_fraction;
        if (o_horizon->count()) cfg.dataset.market.horizon = horizon;
        if (o_rho->count()) cfg.dataset.market.rho = rho;
        if (given(o_burn)) cfg.cpm.sampler.n_burn = n_burn;
        if (given(o_keep)) cfg.cpm.sampler.n_keep = n_keep;
        if (given(o_thin)) cfg.cpm.sampler.thin = thin;
        if (given(o_thr)) cfg.cpm.threshold = threshold;
        if (given(o_feat)) cfg.cpm.feature_mode = feature_mode_from_string(features);
        if (given(o_tf)) cfg.train_fraction = train_fraction;
        if (given(o_dw)) cfg.cpm.delta_w = delta_w;
        if (given(o_models)) cfg.cpm.n_models = n_models;
        if (given(o_span)) {
            if (span % cfg.cpm.delta_w != 0)
                throw ValidationError("--span " + std::to_string(span) + " is not a multiple of delta_w " +
                                      std::to_string(cfg.cpm.delta_w));
            cfg.cpm.n_models = span / cfg.cpm.delta_w;
        }
        if (o_dws->count()) cfg.sweep_delta_ws = delta_ws;
        if (o_spans->count()) cfg.sweep_spans = spans;
        if (!data.empty()) cfg.data_dir = data;
        if (!test_data.empty()) cfg.test_data_dir = test_data;
        if (!model.empty()) cfg.model_dir = model;
        if (!report_in.empty()) cfg.report_input = report_in;
        cfg.trace_id = trace;
        cfg.incremental = incremental;
        cfg.all_traces = all;
        cfg.validate();

        const Context ctx{cfg, out, out_explicit};
        if (gen->parsed()) return cmd_generate(ctx);
        if (train->parsed()) return cmd_train(ctx);
        if (predict->parsed()) return cmd_predict(ctx);
        if (evaluate->parsed()) return cmd_evaluate(ctx);
        if (sweep_cmd->parsed()) return cmd_sweep(ctx);
        if (report->parsed()) return cmd_report(ctx);
        return kExitValidation;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.error_class());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitComputation;
    }
}

}  // namespace cpm::cli
