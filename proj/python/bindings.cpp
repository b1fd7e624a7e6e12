#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "randcheck/attacks.hpp"
#include "randcheck/commands.hpp"
#include "randcheck/errors.hpp"
#include "randcheck/model.hpp"
#include "randcheck/nagfactor.hpp"
#include "randcheck/rng.hpp"
#include "randcheck/smoothing.hpp"
#include "randcheck/subspace.hpp"
#include "randcheck/sweep.hpp"

namespace py = pybind11;
using namespace randcheck;

namespace {

StreamSeed seed_of(std::uint64_t s) { return StreamSeed{s}; }

py::dict outcome_dict(const SearchOutcome& o) {
    py::dict d;
    d["datapoint"] = o.datapoint_id;
    d["method"] = to_string(o.method);
    d["found"] = o.found;
    d["clean_error"] = o.clean_error;
    d["queries"] = o.queries;
    d["distance"] = o.distance ? py::cast(*o.distance) : py::none();
    d["adversarial_point"] = o.adversarial_point ? py::cast(*o.adversarial_point) : py::none();
    return d;
}

PgdConfig pgd_config(double epsilon, const std::string& norm, int steps, std::optional<double> step_size,
                     int restarts, bool random_start) {
    PgdConfig cfg;
    cfg.epsilon = epsilon;
    cfg.norm = parse_norm(norm);
    cfg.steps = steps;
    cfg.step_size = step_size;
    cfg.restarts = restarts;
    cfg.random_start = random_start;
    cfg.validate();
    return cfg;
}

SmoothingConfig smoothing_config(int n, double sigma, const std::string& mode, int cycle_k,
                                 std::optional<double> abstain) {
    SmoothingConfig cfg;
    cfg.n = n;
    cfg.sigma = sigma;
    cfg.mode = parse_smoothing_mode(mode);
    cfg.cycle_k = cycle_k;
    cfg.abstain_threshold = abstain;
    cfg.validate();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_randcheck, m) {
    m.doc() = "Evaluation tools for randomized and deterministic defenses";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_RuntimeError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    // rng
    m.def("splitmix64_mix", &splitmix64_mix, py::arg("x"));
    m.def("fnv1a64", [](const std::string& s) { return fnv1a64(s); }, py::arg("text"));
    m.def(
        "child", [](std::uint64_t parent, const std::string& label, std::uint64_t index) {
            return child(seed_of(parent), label, index).state;
        },
        py::arg("parent"), py::arg("label"), py::arg("index"));
    m.def(
        "derive_stream",
        [](std::uint64_t seed, const std::vector<std::pair<std::string, std::uint64_t>>& tags) {
            std::vector<Tag> t;
            for (const auto& [label, index] : tags) t.push_back(Tag{label, index});
            return derive_stream(seed, std::span<const Tag>(t)).state;
        },
        py::arg("seed"), py::arg("tags") = std::vector<std::pair<std::string, std::uint64_t>>{});
    m.def(
        "uniforms", [](std::uint64_t stream, int count) {
            StreamSeed s{stream};
            std::vector<double> out;
            for (int i = 0; i < count; ++i) out.push_back(next_uniform(s));
            return out;
        },
        py::arg("stream"), py::arg("count"));
    m.def("box_muller", &box_muller, py::arg("u1"), py::arg("u2"), py::arg("sigma") = 1.0);
    m.def(
        "gaussian_vector", [](std::uint64_t stream, int dim, double sigma) {
            StreamSeed s{stream};
            return gaussian_vector(s, dim, sigma);
        },
        py::arg("stream"), py::arg("dim"), py::arg("sigma") = 1.0);
    m.def("parse_seed", [](const std::string& s) { return parse_seed(s); }, py::arg("text"));

    // subspace
    m.def(
        "make_basis", [](std::uint64_t stream, int k, int d) { return make_basis(seed_of(stream), k, d).basis; },
        py::arg("stream"), py::arg("k"), py::arg("d"));
    m.def(
        "grid_coords",
        [](int k, int bins, double epsilon, const std::string& norm) {
            const auto pts = grid_coords(GridSpec{bins, epsilon, parse_norm(norm)}, k);
            Eigen::MatrixXd out(static_cast<Eigen::Index>(pts.size()), k);
            for (std::size_t i = 0; i < pts.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
            return out;
        },
        py::arg("k"), py::arg("bins"), py::arg("epsilon"), py::arg("norm") = "l2");
    m.def(
        "grid_count",
        [](int k, int bins, double epsilon, const std::string& norm) {
            return grid_count(GridSpec{bins, epsilon, parse_norm(norm)}, k);
        },
        py::arg("k"), py::arg("bins"), py::arg("epsilon"), py::arg("norm") = "l2");
    m.def(
        "sample_coords",
        [](int k, int count, double epsilon, const std::string& norm, std::uint64_t stream) {
            const auto pts = sample_coords(GridSpec{3, epsilon, parse_norm(norm)}, k, count, seed_of(stream));
            Eigen::MatrixXd out(static_cast<Eigen::Index>(pts.size()), k);
            for (std::size_t i = 0; i < pts.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
            return out;
        },
        py::arg("k"), py::arg("count"), py::arg("epsilon"), py::arg("norm"), py::arg("stream"));
    m.def(
        "lift",
        [](const Eigen::MatrixXd& basis, const Eigen::VectorXd& anchor, const Eigen::VectorXd& c,
           const std::string& norm) {
            const Lifted l = lift(Subspace{basis}, anchor, c, parse_norm(norm));
            return py::make_tuple(l.point, l.achieved_distance);
        },
        py::arg("basis"), py::arg("anchor"), py::arg("coords"), py::arg("norm") = "l2");

    // model
    py::class_<Network>(m, "Network")
        .def_readonly("layer_dims", &Network::layer_dims)
        .def_readonly("weights", &Network::weights)
        .def_readonly("biases", &Network::biases)
        .def_property_readonly("activation", [](const Network& n) { return to_string(n.activation); })
        .def_property_readonly("input_dim", &Network::input_dim)
        .def_property_readonly("num_classes", &Network::num_classes)
        .def("forward", [](const Network& n, const Eigen::VectorXd& x) { return forward(n, x); }, py::arg("x"))
        .def("predict", [](const Network& n, const Eigen::VectorXd& x) { return predict_label(n, x); }, py::arg("x"))
        .def(
            "input_gradient",
            [](const Network& n, const Eigen::VectorXd& x, int y) { return input_gradient(n, x, y); }, py::arg("x"),
            py::arg("label"))
        .def(
            "save",
            [](const Network& n, const std::filesystem::path& p, const std::string& meta) { save_network(p, n, meta); },
            py::arg("path"), py::arg("metadata") = "")
        .def(py::self == py::self);
    m.def(
        "load_network",
        [](const std::filesystem::path& p) {
            std::string meta;
            Network n = load_network(p, &meta);
            return py::make_tuple(std::move(n), meta);
        },
        py::arg("path"));
    m.def(
        "network_from_weights",
        [](const std::vector<Eigen::MatrixXd>& weights, const std::vector<Eigen::VectorXd>& biases,
           const std::string& activation, double gamma) {
            if (weights.empty() || weights.size() != biases.size()) throw ConfigError("weights/biases mismatch");
            std::vector<int> dims{static_cast<int>(weights.front().cols())};
            for (const auto& w : weights) dims.push_back(static_cast<int>(w.rows()));
            Network n = Network::zeros(dims, activation == "kwta" ? Activation::kwta(gamma) : Activation::relu());
            n.weights = weights;
            n.biases = biases;
            n.validate();
            return n;
        },
        py::arg("weights"), py::arg("biases"), py::arg("activation") = "relu", py::arg("gamma") = 0.1);
    m.def("kwta_activate", &kwta_activate, py::arg("v"), py::arg("gamma"));

    py::class_<Dataset>(m, "Dataset")
        .def(py::init([](Eigen::MatrixXd points, std::vector<int> labels, int num_classes) {
                 Dataset d{std::move(points), std::move(labels), num_classes};
                 d.validate();
                 return d;
             }),
             py::arg("points"), py::arg("labels"), py::arg("num_classes"))
        .def_readonly("points", &Dataset::points)
        .def_readonly("labels", &Dataset::labels)
        .def_readonly("num_classes", &Dataset::num_classes)
        .def("__len__", &Dataset::size);
    m.def(
        "gen_dataset",
        [](const std::string& kind, int d, int classes, int n_per_class, double noise, double spread,
           std::uint64_t stream, const std::string& split) {
            DatasetSpec spec{parse_dataset_kind(kind), d, classes, n_per_class, noise, spread};
            return gen_dataset(spec, seed_of(stream), split == "test" ? Dataset::Split::Test : Dataset::Split::Train);
        },
        py::arg("kind") = "blobs", py::arg("d") = 32, py::arg("classes") = 4, py::arg("n_per_class") = 100,
        py::arg("noise") = 0.1, py::arg("spread") = 1.0, py::arg("stream") = 0, py::arg("split") = "train");
    m.def(
        "train",
        [](const std::vector<int>& layer_dims, const std::string& activation, double gamma, const Dataset& data,
           int epochs, int batch_size, double lr, double momentum, double augment_sigma, std::uint64_t stream) {
            TrainParams hp{epochs, batch_size, lr, momentum, augment_sigma};
            const Activation act = activation == "kwta" ? Activation::kwta(gamma) : Activation::relu();
            TrainResult r = train(layer_dims, act, data, hp, seed_of(stream));
            py::list hist;
            for (const auto& e : r.history) {
                hist.append(py::dict(py::arg("epoch") = e.epoch, py::arg("loss") = e.loss,
                                     py::arg("train_acc") = e.train_acc));
            }
            return py::make_tuple(std::move(r.net), hist);
        },
        py::arg("layer_dims"), py::arg("activation") = "relu", py::arg("gamma") = 0.1, py::arg("data"),
        py::arg("epochs") = 30, py::arg("batch_size") = 32, py::arg("learning_rate") = 0.05,
        py::arg("momentum") = 0.9, py::arg("augment_sigma") = 0.0, py::arg("stream") = 0);
    m.def("accuracy", &accuracy, py::arg("net"), py::arg("data"));

    // smoothing
    m.def(
        "smoothed_predict",
        [](const Network& net, const Eigen::VectorXd& x, int n, double sigma, const std::string& mode, int cycle_k,
           std::optional<double> abstain, std::uint64_t call_index, std::uint64_t stream) {
            const SmoothedPrediction p =
                smoothed_predict(net, smoothing_config(n, sigma, mode, cycle_k, abstain), x, call_index, seed_of(stream));
            return py::make_tuple(p.label, p.counts);
        },
        py::arg("net"), py::arg("x"), py::arg("n") = 100, py::arg("sigma") = 0.25, py::arg("mode") = "fixed",
        py::arg("cycle_k") = 1, py::arg("abstain") = py::none(), py::arg("call_index") = 0, py::arg("stream") = 0);

    // attacks
    m.def(
        "pgd_attack",
        [](const Network& net, const Eigen::VectorXd& x, int label, double epsilon, const std::string& norm, int steps,
           std::optional<double> step_size, int restarts, bool random_start, std::uint64_t stream) {
            const NetworkClassifier clf(net);
            const AttackTarget t = make_target(clf);
            return outcome_dict(pgd_attack(t.predict, t.gradient, x, label,
                                           pgd_config(epsilon, norm, steps, step_size, restarts, random_start),
                                           seed_of(stream)));
        },
        py::arg("net"), py::arg("x"), py::arg("label"), py::arg("epsilon") = 0.5, py::arg("norm") = "l2",
        py::arg("steps") = 40, py::arg("step_size") = py::none(), py::arg("restarts") = 1,
        py::arg("random_start") = true, py::arg("stream") = 0);
    m.def(
        "subspace_pgd",
        [](const Network& net, const Eigen::MatrixXd& basis, const Eigen::VectorXd& x, int label, double epsilon,
           const std::string& norm, int steps, std::optional<double> step_size, int restarts, bool random_start,
           std::uint64_t stream) {
            const NetworkClassifier clf(net);
            const AttackTarget t = make_target(clf);
            return outcome_dict(subspace_pgd(t.predict, t.gradient, Subspace{basis}, x, label,
                                             pgd_config(epsilon, norm, steps, step_size, restarts, random_start),
                                             seed_of(stream)));
        },
        py::arg("net"), py::arg("basis"), py::arg("x"), py::arg("label"), py::arg("epsilon") = 0.5,
        py::arg("norm") = "l2", py::arg("steps") = 40, py::arg("step_size") = py::none(), py::arg("restarts") = 1,
        py::arg("random_start") = true, py::arg("stream") = 0);

    // nag factor
    m.def(
        "group_mode_predictions",
        [](const std::vector<int>& inferences, int n, std::uint64_t stream) {
            return group_mode_predictions(inferences, n, seed_of(stream));
        },
        py::arg("inferences"), py::arg("n"), py::arg("stream"));
    m.def(
        "estimate_p", [](const std::vector<int>& preds, int y) { return estimate_p(preds, y); }, py::arg("predictions"),
        py::arg("label"));
    m.def(
        "nag_curve",
        [](const std::vector<std::pair<int, double>>& per_point, const std::vector<int>& trials) {
            const NagCurve c = nag_curve(per_point, trials);
            return py::make_tuple(c.robust_accuracy, c.ci95_halfwidth);
        },
        py::arg("per_point_p"), py::arg("trial_counts"));

    // sweep
    m.def(
        "sweep",
        [](const Network& net, const Dataset& data, const std::vector<int>& ids, std::uint64_t seed,
           const std::vector<std::pair<int, int>>& dims_bins, double epsilon, const std::string& norm,
           const std::vector<std::string>& methods, int workers, double margin) {
            SweepPlan plan;
            plan.seed = seed;
            plan.dims_bins = dims_bins;
            plan.epsilon = epsilon;
            plan.norm = parse_norm(norm);
            plan.methods.clear();
            for (const auto& s : methods) plan.methods.push_back(parse_method(s));
            plan.validate();
            const NetworkClassifier clf(net);
            std::vector<SweepCell> cells;
            {
                py::gil_scoped_release release;
                cells = run_sweep(clf, data, ids, plan, workers);
            }
            const VulnerabilityTable table = union_fraction_table(cells, "model");
            py::list out_cells;
            for (const auto& c : cells) {
                py::dict d = outcome_dict(c.outcome);
                d["dims"] = c.dims;
                d["bins"] = c.bins;
                out_cells.append(d);
            }
            py::dict summary;
            for (const auto& k : table.methods) summary[py::str(to_string(k))] = table.summary().fraction.at(k);
            return py::make_tuple(out_cells, summary, to_string(obfuscation_verdict(table, margin).kind),
                                  table_csv(table));
        },
        py::arg("net"), py::arg("data"), py::arg("ids"), py::arg("seed") = 0,
        py::arg("dims_bins") = default_dims_bins(), py::arg("epsilon") = 0.5, py::arg("norm") = "l2",
        py::arg("methods") = std::vector<std::string>{"grid", "random", "pgd1", "pgd10", "pgd20"},
        py::arg("workers") = 1, py::arg("margin") = 0.1);

    // CLI entry
    m.def(
        "run_command",
        [](const std::string& command, const std::string& config_text, const std::vector<std::string>& overrides,
           int workers) {
            Config cfg = Config::parse(config_text);
            for (const auto& o : overrides) cfg.set_override(o);
            std::ostringstream log, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = run_command(command, cfg, workers, log, err);
            }
            return py::make_tuple(code, log.str(), err.str());
        },
        py::arg("command"), py::arg("config_text") = "", py::arg("overrides") = std::vector<std::string>{},
        py::arg("workers") = 1);
    m.attr("__version__") = "0.1.0";
}
