#include "randcheck/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "randcheck/attacks.hpp"
#include "randcheck/errors.hpp"
#include "randcheck/nagfactor.hpp"
#include "randcheck/parallel.hpp"
#include "randcheck/smoothing.hpp"
#include "randcheck/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace randcheck {

namespace {

//---------------------------------------------------------------------------//
// Output helpers
//---------------------------------------------------------------------------//

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct RunMeta {
    std::uint64_t seed = 0;
    json config;
    std::string hash;
};

RunMeta make_meta(const Config& cfg, std::uint64_t seed) {
    RunMeta m;
    m.seed = seed;
    m.config = cfg.resolved();
    m.config.erase("out");
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(fnv1a64(m.config.dump())));
    m.hash = buf;
    return m;
}

json meta_json(const RunMeta& m, const std::string& command) {
    return json{{"tool", kVersion}, {"command", command}, {"seed", m.seed}, {"config_hash", m.hash}, {"config", m.config}};
}

std::string csv_preamble(const RunMeta& m, const std::string& command) {
    std::ostringstream os;
    os << "# " << kVersion << " " << command << "\n";
    os << "# seed: " << m.seed << "\n";
    os << "# config_hash: " << m.hash << "\n";
    os << "# config: " << m.config.dump() << "\n";
    return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << content;
    if (!os) throw ConfigError("failed writing " + path.string());
}

fs::path prepare_out(const Config& cfg) {
    fs::path out = cfg.get_string("out", ".");
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ConfigError("cannot create output directory " + out.string() + ": " + ec.message());
    return out;
}

void finish(const Config& cfg, const fs::path& out, const RunMeta& meta, std::ostream& log) {
    write_file(out / "config.resolved.json", meta.config.dump(2) + "\n");
    for (const std::string& k : cfg.unused_keys()) log << "warning: config key '" << k << "' was not used\n";
}

//---------------------------------------------------------------------------//
// Shared resolution of data and model
//---------------------------------------------------------------------------//

struct DataSource {
    std::optional<fs::path> train_csv;
    std::optional<fs::path> test_csv;
    DatasetSpec spec;
    int n_test_per_class = 100;
    int classes_hint = 0;
};

DataSource read_data_source(const Config& cfg) {
    DataSource src;
    if (auto p = cfg.get_optional_string("data.train_csv")) src.train_csv = *p;
    if (auto p = cfg.get_optional_string("data.test_csv")) src.test_csv = *p;
    for (const auto& p : {src.train_csv, src.test_csv}) {
        if (p && !fs::exists(*p)) throw ConfigError("dataset file not found: " + p->string());
    }
    if (src.train_csv || src.test_csv) {
        src.classes_hint = static_cast<int>(cfg.get_int("data.classes", 0));
        return src;
    }
    src.spec.kind = parse_dataset_kind(cfg.get_string("data.kind", "blobs"));
    src.spec.d = static_cast<int>(cfg.get_int("data.d", 32));
    src.spec.classes = static_cast<int>(cfg.get_int("data.classes", 4));
    src.spec.n_per_class = static_cast<int>(cfg.get_int("data.n_per_class", 500));
    src.spec.noise = cfg.get_double("data.noise", 0.08);
    if (src.spec.kind == DatasetSpec::Kind::Blobs) src.spec.spread = cfg.get_double("data.spread", 1.0);
    src.n_test_per_class = static_cast<int>(cfg.get_int("data.n_test_per_class", 100));
    if (src.spec.d < 2 || src.spec.classes < 2 || src.spec.n_per_class < 1 || src.n_test_per_class < 1 ||
        src.spec.noise < 0.0 || src.spec.spread < 0.0 || src.spec.spread > 1.0) {
        throw ConfigError("invalid data block");
    }
    return src;
}

Dataset load_split(const DataSource& src, std::uint64_t seed, Dataset::Split split) {
    const auto& path = split == Dataset::Split::Train ? src.train_csv : src.test_csv;
    if (src.train_csv || src.test_csv) {
        if (!path) {
            throw ConfigError(std::string("missing data.") + (split == Dataset::Split::Train ? "train_csv" : "test_csv"));
        }
        Dataset d = read_dataset_csv(*path, src.classes_hint);
        d.split = split;
        return d;
    }
    DatasetSpec spec = src.spec;
    if (split == Dataset::Split::Test) spec.n_per_class = src.n_test_per_class;
    return gen_dataset(spec, derive_stream(seed, {{"dataset", 0}}), split);
}

struct ModelSource {
    std::optional<fs::path> path;
    std::vector<int> hidden;
    Activation activation;
    TrainParams hp;
};

ModelSource read_model_source(const Config& cfg, bool allow_file) {
    ModelSource src;
    if (allow_file) {
        if (auto p = cfg.get_optional_string("model.path")) {
            if (!fs::exists(*p)) throw ConfigError("model file not found: " + *p);
            src.path = *p;
            return src;
        }
    }
    for (auto h : cfg.get_int_list("model.hidden", {64, 64})) {
        if (h < 1) throw ConfigError("model.hidden entries must be positive");
        src.hidden.push_back(static_cast<int>(h));
    }
    const std::string act = cfg.get_string("model.activation", "relu");
    if (act == "relu") {
        src.activation = Activation::relu();
    } else if (act == "kwta") {
        const double gamma = cfg.get_double("model.gamma", 0.1);
        if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("model.gamma must lie in (0,1]");
        src.activation = Activation::kwta(gamma);
    } else {
        throw ConfigError("model.activation must be relu or kwta");
    }
    src.hp.epochs = static_cast<int>(cfg.get_int("train.epochs", 30));
    src.hp.batch_size = static_cast<int>(cfg.get_int("train.batch_size", 32));
    src.hp.learning_rate = cfg.get_double("train.learning_rate", 0.05);
    src.hp.momentum = cfg.get_double("train.momentum", 0.9);
    src.hp.augment_sigma = cfg.get_double("train.augment_sigma", 0.0);
    if (src.hp.epochs < 0 || src.hp.batch_size < 1 || !(src.hp.learning_rate > 0.0) || src.hp.momentum < 0.0 ||
        src.hp.augment_sigma < 0.0) {
        throw ConfigError("invalid train block");
    }
    return src;
}

std::vector<int> layer_dims(const ModelSource& src, int d, int classes) {
    std::vector<int> dims{d};
    dims.insert(dims.end(), src.hidden.begin(), src.hidden.end());
    dims.push_back(classes);
    return dims;
}

TrainResult train_model(const ModelSource& src, const Dataset& train_set, const Dataset* test_set,
                        std::uint64_t seed) {
    return train(layer_dims(src, train_set.dim(), train_set.num_classes), src.activation, train_set, src.hp,
                 derive_stream(seed, {{"train", 0}}), test_set);
}

Network obtain_model(const ModelSource& model_src, const DataSource& data_src, std::uint64_t seed,
                     const Dataset& test_set) {
    Network net;
    if (model_src.path) {
        net = load_network(*model_src.path);
    } else {
        const Dataset train_set = load_split(data_src, seed, Dataset::Split::Train);
        net = train_model(model_src, train_set, nullptr, seed).net;
    }
    if (net.input_dim() != test_set.dim()) throw ConfigError("model input dimension does not match the dataset");
    if (net.num_classes() < test_set.num_classes) throw ConfigError("model has fewer classes than the dataset");
    return net;
}

SmoothingConfig read_smoothing(const Config& cfg, SmoothingMode default_mode) {
    SmoothingConfig s;
    s.sigma = cfg.get_double("smoothing.sigma", 0.25);
    s.mode = parse_smoothing_mode(cfg.get_string("smoothing.mode", to_string(default_mode)));
    s.cycle_k = static_cast<int>(cfg.get_int("smoothing.cycle_k", 1));
    s.abstain_threshold = cfg.get_optional_double("smoothing.abstain");
    if (!(s.sigma > 0.0) || s.cycle_k < 1) throw ConfigError("invalid smoothing block");
    if (s.abstain_threshold && !(*s.abstain_threshold >= 0.0 && *s.abstain_threshold <= 1.0)) {
        throw ConfigError("smoothing.abstain must lie in [0,1]");
    }
    return s;
}

PgdConfig read_pgd(const Config& cfg, int default_restarts) {
    PgdConfig p;
    p.epsilon = cfg.get_double("epsilon", 0.5);
    p.norm = parse_norm(cfg.get_string("norm", "l2"));
    p.steps = static_cast<int>(cfg.get_int("pgd.steps", 40));
    p.step_size = cfg.get_optional_double("pgd.step_size");
    p.restarts = static_cast<int>(cfg.get_int("pgd.restarts", default_restarts));
    p.random_start = cfg.get_bool("pgd.random_start", true);
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid pgd block: ") + e.what());
    }
    return p;
}

std::vector<int> positive_list(const Config& cfg, const std::string& key, const std::vector<std::int64_t>& fallback) {
    std::vector<int> out;
    for (auto v : cfg.get_int_list(key, fallback)) {
        if (v < 1) throw ConfigError(key + " entries must be positive");
        out.push_back(static_cast<int>(v));
    }
    if (out.empty()) throw ConfigError(key + " must not be empty");
    return out;
}

double binomial_ci95(double acc, std::size_t m) {
    return m == 0 ? 0.0 : 1.96 * std::sqrt(acc * (1.0 - acc) / static_cast<double>(m));
}

json vector_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json outcome_json(const SearchOutcome& o) {
    json j{{"datapoint", o.datapoint_id}, {"method", to_string(o.method)}, {"found", o.found},
           {"clean_error", o.clean_error}, {"queries", o.queries}};
    j["distance"] = o.distance ? json(*o.distance) : json(nullptr);
    j["adversarial_point"] = o.adversarial_point ? vector_json(*o.adversarial_point) : json(nullptr);
    return j;
}

}  // namespace

std::vector<int> select_points(int available, int count) {
    if (count < 1) throw ConfigError("number of evaluation points must be positive");
    if (count > available) {
        throw ConfigError("requested " + std::to_string(count) + " points but the test set has " +
                          std::to_string(available));
    }
    std::vector<int> ids;
    ids.reserve(count);
    for (int i = 0; i < count; ++i) {
        ids.push_back(static_cast<int>(static_cast<std::int64_t>(i) * available / count));
    }
    return ids;
}

//---------------------------------------------------------------------------//
// gen-data
//---------------------------------------------------------------------------//

void cmd_gen_data(const Config& cfg, int, std::ostream& log) {
    const std::uint64_t seed = cfg.get_seed("seed", 0);
    const DataSource src = read_data_source(cfg);
    if (src.train_csv || src.test_csv) throw ConfigError("gen-data generates data; remove data.*_csv keys");
    const fs::path out = prepare_out(cfg);
    const RunMeta meta = make_meta(cfg, seed);

    for (auto split : {Dataset::Split::Train, Dataset::Split::Test}) {
        const Dataset d = load_split(src, seed, split);
        std::ostringstream os;
        os << csv_preamble(meta, "gen-data");
        write_dataset_csv(os, d);
        const char* name = split == Dataset::Split::Train ? "train.csv" : "test.csv";
        write_file(out / name, os.str());
        log << "wrote " << (out / name).string() << " (" << d.size() << " points)\n";
    }
    finish(cfg, out, meta, log);
}

//---------------------------------------------------------------------------//
// train
//---------------------------------------------------------------------------//

void cmd_train(const Config& cfg, int, std::ostream& log) {
    const std::uint64_t seed = cfg.get_seed("seed", 0);
    const DataSource data_src = read_data_source(cfg);
    const ModelSource model_src = read_model_source(cfg, false);
    const fs::path out = prepare_out(cfg);
    const RunMeta meta = make_meta(cfg, seed);

    const Dataset train_set = load_split(data_src, seed, Dataset::Split::Train);
    const Dataset test_set = load_split(data_src, seed, Dataset::Split::Test);
    if (train_set.dim() != test_set.dim()) throw ConfigError("train and test sets differ in dimension");
    const TrainResult result = train_model(model_src, train_set, &test_set, seed);

    save_network(out / "model.bin", result.net, meta_json(meta, "train").dump());
    std::ostringstream hist;
    hist << csv_preamble(meta, "train") << "epoch,loss,train_acc,test_acc\n";
    for (const EpochStats& e : result.history) {
        hist << e.epoch << ',' << fmt_double(e.loss) << ',' << fmt_double(e.train_acc) << ','
             << fmt_double(e.test_acc.value_or(0.0)) << '\n';
    }
    write_file(out / "history.csv", hist.str());
    const double test_acc = accuracy(result.net, test_set);
    log << "trained " << to_string(result.net.activation) << " network, test accuracy " << fmt_double(test_acc)
        << "\n";
    finish(cfg, out, meta, log);
}

//---------------------------------------------------------------------------//
// nag
//---------------------------------------------------------------------------//

void cmd_nag(const Config& cfg, int workers, std::ostream& log) {
    const std::uint64_t seed = cfg.get_seed("seed", 0);
    const DataSource data_src = read_data_source(cfg);
    const ModelSource model_src = read_model_source(cfg, true);
    const SmoothingConfig smooth = read_smoothing(cfg, SmoothingMode::Random);
    const std::vector<int> n_list = positive_list(cfg, "smoothing.n", {1, 10, 100});
    const std::vector<int> trials = positive_list(cfg, "nag.trials", {1, 10, 100, 1000});
    const int n_base = static_cast<int>(cfg.get_int("nag.base_inferences", 10000));
    const int n_points = static_cast<int>(cfg.get_int("nag.points", 100));
    for (int n : n_list) {
        if (n > n_base) throw ConfigError("smoothing.n exceeds nag.base_inferences");
    }
    const fs::path out = prepare_out(cfg);
    const RunMeta meta = make_meta(cfg, seed);

    const Dataset test_set = load_split(data_src, seed, Dataset::Split::Test);
    const Network net = obtain_model(model_src, data_src, seed, test_set);
    const std::vector<int> ids = select_points(test_set.size(), n_points);

    // p_hat[point][n index] for each mode
    std::vector<std::vector<double>> p_random(ids.size()), p_fixed(ids.size());
    parallel_for(ids.size(), workers, [&](std::size_t i) {
        const int id = ids[i];
        const Eigen::VectorXd x = test_set.points.row(id).transpose();
        const int y = test_set.labels[id];
        const StreamSeed base = derive_stream(seed, {{"nag", 0}, {"datapoint", static_cast<std::uint64_t>(id)}});
        const std::vector<int> inferences = base_inferences(net, smooth.sigma, x, n_base, base);
        for (int n : n_list) {
            const auto preds = group_mode_predictions(inferences, n, child(base, "group", static_cast<std::uint64_t>(n)));
            p_random[i].push_back(estimate_p(preds, y));
            SmoothingConfig fixed = smooth;
            fixed.mode = SmoothingMode::Fixed;
            fixed.n = n;
            p_fixed[i].push_back(smoothed_predict(net, fixed, x, 0, base).label == y ? 1.0 : 0.0);
        }
    });

    json doc = meta_json(meta, "nag");
    doc["curves"] = json::array();
    for (const auto& [mode, table] : {std::pair{SmoothingMode::Random, &p_random}, std::pair{SmoothingMode::Fixed, &p_fixed}}) {
        for (std::size_t k = 0; k < n_list.size(); ++k) {
            std::vector<std::pair<int, double>> per_point;
            for (std::size_t i = 0; i < ids.size(); ++i) per_point.emplace_back(ids[i], (*table)[i][k]);
            const NagCurve curve = nag_curve(per_point, trials);

            std::ostringstream csv;
            csv << csv_preamble(meta, "nag") << "N,robust_accuracy,ci95\n";
            for (std::size_t t = 0; t < trials.size(); ++t) {
                csv << curve.trial_counts[t] << ',' << fmt_double(curve.robust_accuracy[t]) << ','
                    << fmt_double(curve.ci95_halfwidth[t]) << '\n';
            }
            const std::string name = "nag_" + to_string(mode) + "_n" + std::to_string(n_list[k]) + ".csv";
            write_file(out / name, csv.str());

            json pp = json::array();
            for (const auto& [id, p] : curve.per_point_p) pp.push_back({id, p});
            doc["curves"].push_back({{"mode", to_string(mode)},
                                     {"n", n_list[k]},
                                     {"csv", name},
                                     {"trial_counts", curve.trial_counts},
                                     {"robust_accuracy", curve.robust_accuracy},
                                     {"ci95", curve.ci95_halfwidth},
                                     {"per_point_p", pp}});
            log << to_string(mode) << " n=" << n_list[k] << ": robust accuracy at N=" << trials.front() << " "
                << fmt_double(curve.robust_accuracy.front()) << ", at N=" << trials.back() << " "
                << fmt_double(curve.robust_accuracy.back()) << "\n";
        }
    }
    write_file(out / "nag.json", doc.dump(2) + "\n");
    finish(cfg, out, meta, log);
}

//---------------------------------------------------------------------------//
// smooth-compare
//---------------------------------------------------------------------------//

void cmd_smooth_compare(const Config& cfg, int workers, std::ostream& log) {
    const std::uint64_t seed = cfg.get_seed("seed", 0);
    const DataSource data_src = read_data_source(cfg);
    const ModelSource model_src = read_model_source(cfg, true);
    const SmoothingConfig smooth = read_smoothing(cfg, SmoothingMode::Random);
    const bool with_cycle = cfg.has("smoothing.cycle_k");
    const std::vector<int> n_list = positive_list(cfg, "compare.n_list", {1, 2, 4, 8, 16, 32});
    const int n_points = static_cast<int>(cfg.get_int("compare.points", 200));
    const PgdConfig pgd = read_pgd(cfg, 1);
    const fs::path out = prepare_out(cfg);
    const RunMeta meta = make_meta(cfg, seed);

    const Dataset test_set = load_split(data_src, seed, Dataset::Split::Test);
    const Network net = obtain_model(model_src, data_src, seed, test_set);
    const std::vector<int> ids = select_points(test_set.size(), n_points);

    std::vector<SmoothingMode> modes{SmoothingMode::Random, SmoothingMode::Fixed};
    if (with_cycle) modes.push_back(SmoothingMode::Cycle);

    // outcomes[point][n index * modes + mode index]
    std::vector<std::vector<SearchOutcome>> outcomes(ids.size());
    parallel_for(ids.size(), workers, [&](std::size_t i) {
        const int id = ids[i];
        const Eigen::VectorXd x = test_set.points.row(id).transpose();
        const int y = test_set.labels[id];
        const StreamSeed base = derive_stream(seed, {{"compare", 0}, {"datapoint", static_cast<std::uint64_t>(id)}});
        for (int n : n_list) {
            for (SmoothingMode mode : modes) {
                SmoothingConfig sc = smooth;
                sc.n = n;
                sc.mode = mode;
                const SmoothedClassifier clf(net, sc, base);
                const AttackTarget target = make_target(clf);
                SearchOutcome o = pgd_attack(target.predict, target.gradient, x, y, pgd,
                                             child(base, "pgd", static_cast<std::uint64_t>(n)));
                o.datapoint_id = id;
                outcomes[i].push_back(std::move(o));
            }
        }
    });

    json doc = meta_json(meta, "smooth-compare");
    doc["rows"] = json::array();
    std::ostringstream csv;
    csv << csv_preamble(meta, "smooth-compare") << "n,mode,robust_accuracy,ci95\n";
    for (std::size_t k = 0; k < n_list.size(); ++k) {
        for (std::size_t m = 0; m < modes.size(); ++m) {
            std::size_t robust = 0;
            json per_point = json::array();
            for (std::size_t i = 0; i < ids.size(); ++i) {
                const SearchOutcome& o = outcomes[i][k * modes.size() + m];
                robust += !o.found;
                per_point.push_back(outcome_json(o));
            }
            const double acc = static_cast<double>(robust) / static_cast<double>(ids.size());
            const double ci = binomial_ci95(acc, ids.size());
            csv << n_list[k] << ',' << to_string(modes[m]) << ',' << fmt_double(acc) << ',' << fmt_double(ci) << '\n';
            doc["rows"].push_back({{"n", n_list[k]},
                                   {"mode", to_string(modes[m])},
                                   {"robust_accuracy", acc},
                                   {"ci95", ci},
                                   {"outcomes", per_point}});
            log << "n=" << n_list[k] << " " << to_string(modes[m]) << ": robust accuracy " << fmt_double(acc) << "\n";
        }
    }
    write_file(out / "smooth_compare.csv", csv.str());
    write_file(out / "smooth_compare.json", doc.dump(2) + "\n");
    finish(cfg, out, meta, log);
}

//---------------------------------------------------------------------------//
// sweep
//---------------------------------------------------------------------------//

void cmd_sweep(const Config& cfg, int workers, std::ostream& log) {
    const std::uint64_t seed = cfg.get_seed("seed", 0);
    const DataSource data_src = read_data_source(cfg);
    const ModelSource model_src = read_model_source(cfg, true);

    SweepPlan plan;
    plan.seed = seed;
    plan.dims_bins = cfg.get_pair_list("sweep.dims_bins", default_dims_bins());
    plan.epsilon = cfg.get_double("epsilon", 0.5);
    plan.norm = parse_norm(cfg.get_string("norm", "l2"));
    plan.methods.clear();
    for (const std::string& m : cfg.get_string_list("sweep.methods", {"grid", "random", "pgd1", "pgd10", "pgd20"})) {
        plan.methods.push_back(parse_method(m));
    }
    plan.pgd_steps = static_cast<int>(cfg.get_int("pgd.steps", 40));
    plan.pgd_step_size = cfg.get_optional_double("pgd.step_size");
    plan.pgd_random_start = cfg.get_bool("pgd.random_start", true);
    plan.exhaustive = cfg.get_bool("sweep.exhaustive", false);
    const std::int64_t cap = cfg.get_int("sweep.budget_cap", static_cast<std::int64_t>(kDefaultGridBudget));
    if (cap < 1) throw ConfigError("sweep.budget_cap must be positive");
    plan.budget_cap = static_cast<std::uint64_t>(cap);
    try {
        plan.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid sweep plan: ") + e.what());
    }
    const int n_points = static_cast<int>(cfg.get_int("sweep.points", 100));
    const bool include_clean = cfg.get_bool("sweep.include_clean_errors", false);
    const double margin = cfg.get_double("sweep.verdict_margin", 0.1);
    const std::string tag = cfg.get_string("sweep.model_tag", "model");
    const std::string target = cfg.get_string("sweep.classifier", "base");
    std::optional<SmoothingConfig> smooth;
    if (target == "smoothed") {
        smooth = read_smoothing(cfg, SmoothingMode::Fixed);
        smooth->n = static_cast<int>(cfg.get_int("smoothing.n", 100));
        if (smooth->n < 1) throw ConfigError("smoothing.n must be positive");
    } else if (target != "base") {
        throw ConfigError("sweep.classifier must be base or smoothed");
    }
    const fs::path out = prepare_out(cfg);
    const RunMeta meta = make_meta(cfg, seed);

    const Dataset test_set = load_split(data_src, seed, Dataset::Split::Test);
    const Network net = obtain_model(model_src, data_src, seed, test_set);
    const std::vector<int> ids = select_points(test_set.size(), n_points);
    for (const auto& [k, b] : plan.dims_bins) {
        if (k > test_set.dim()) throw ConfigError("sweep dims exceed the input dimension");
    }

    std::vector<SweepCell> cells;
    if (smooth) {
        const SmoothedClassifier clf(net, *smooth, derive_stream(seed, {{"smoothing", 0}}));
        cells = run_sweep(clf, test_set, ids, plan, workers);
    } else {
        const NetworkClassifier clf(net);
        cells = run_sweep(clf, test_set, ids, plan, workers);
    }
    const VulnerabilityTable table = union_fraction_table(cells, tag, include_clean);
    const Verdict verdict = obfuscation_verdict(table, margin);

    json doc = meta_json(meta, "sweep");
    doc["model_tag"] = tag;
    doc["datapoints"] = ids;
    doc["clean_errors"] = table.clean_errors;
    doc["clean_errors_included"] = table.clean_errors_included;
    doc["cells"] = json::array();
    for (const SweepCell& c : cells) {
        json j = outcome_json(c.outcome);
        j["dims"] = c.dims;
        j["bins"] = c.bins;
        j["hits"] = c.hits;
        doc["cells"].push_back(std::move(j));
    }
    json rows = json::array();
    for (const TableRow& r : table.rows) {
        json fr = json::object(), fd = json::object();
        for (const MethodKey& m : table.methods) {
            fr[to_string(m)] = r.fraction.at(m);
            fd[to_string(m)] = r.found.at(m);
        }
        rows.push_back({{"dims", r.dims == 0 ? json("all") : json(r.dims)},
                        {"bins", r.dims == 0 ? json(nullptr) : json(r.bins)},
                        {"found", fd},
                        {"fraction", fr},
                        {"union", r.union_size},
                        {"empty_union", r.empty_union}});
    }
    doc["table"] = rows;
    doc["verdict"] = {{"verdict", to_string(verdict.kind)},
                      {"grid_fraction", verdict.grid_fraction},
                      {"pgd_fraction", verdict.pgd_fraction},
                      {"pgd_restarts", verdict.pgd_restarts},
                      {"margin", verdict.margin}};

    write_file(out / "sweep.json", doc.dump(2) + "\n");
    write_file(out / "sweep_table.csv", csv_preamble(meta, "sweep") + table_csv(table));
    log << table_csv(table);
    log << "verdict: " << to_string(verdict.kind) << "\n";
    finish(cfg, out, meta, log);
}

//---------------------------------------------------------------------------//

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"train", "nag", "smooth-compare", "sweep", "gen-data"};
    return names;
}

int run_command(const std::string& name, const Config& cfg, int workers, std::ostream& log, std::ostream& err) {
    try {
        if (name == "gen-data") {
            cmd_gen_data(cfg, workers, log);
        } else if (name == "train") {
            cmd_train(cfg, workers, log);
        } else if (name == "nag") {
            cmd_nag(cfg, workers, log);
        } else if (name == "smooth-compare") {
            cmd_smooth_compare(cfg, workers, log);
        } else if (name == "sweep") {
            cmd_sweep(cfg, workers, log);
        } else {
            err << "error: unknown command '" << name << "'\n";
            return kExitConfig;
        }
    } catch (const PreconditionError& e) {
        err << "precondition violated: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << "\n";
        return kExitConfig;
    } catch (const fs::filesystem_error& e) {
        err << "i/o error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}

}  // namespace randcheck
