#include "randcheck/attacks.hpp"

#include <memory>
#include <stdexcept>

#include "randcheck/errors.hpp"

namespace randcheck {

void PgdConfig::validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("pgd epsilon must be positive");
    if (steps < 1) throw std::invalid_argument("pgd steps must be positive");
    if (restarts < 1) throw std::invalid_argument("pgd restarts must be positive");
    const double a = alpha();
    if (!(a > 0.0) || a > 2.0 * epsilon) throw std::invalid_argument("pgd step size must lie in (0, 2*epsilon]");
}

std::string to_string(MethodKey key) {
    switch (key.method) {
        case SearchMethod::Grid: return "grid";
        case SearchMethod::Random: return "random";
        case SearchMethod::Pgd: return "pgd" + std::to_string(key.restarts);
    }
    return "?";
}

MethodKey parse_method(const std::string& text) {
    if (text == "grid") return MethodKey::grid();
    if (text == "random") return MethodKey::random();
    if (text.starts_with("pgd") && text.size() > 3) {
        int r = 0;
        try {
            std::size_t used = 0;
            r = std::stoi(text.substr(3), &used);
            if (used != text.size() - 3) r = 0;
        } catch (const std::exception&) {
            r = 0;
        }
        if (r >= 1) return MethodKey::pgd(r);
    }
    throw ConfigError("unknown search method '" + text + "'");
}

AttackTarget make_target(const Classifier& clf, std::uint64_t first_call) {
    auto counter = std::make_shared<std::uint64_t>(first_call);
    AttackTarget t;
    t.predict = [&clf, counter](const Eigen::VectorXd& x) { return clf.predict(x, (*counter)++); };
    t.gradient = [&clf, counter](const Eigen::VectorXd& x, int y) { return clf.loss_gradient(x, y, (*counter)++); };
    return t;
}

namespace {

Eigen::VectorXd step_direction(const Eigen::VectorXd& g, Norm norm) {
    if (!g.allFinite()) throw NumericError("attack gradient is not finite");
    if (norm == Norm::Linf) {
        return g.unaryExpr([](double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); });
    }
    const double len = g.norm();
    if (len == 0.0) return Eigen::VectorXd::Zero(g.size());
    return g / len;
}

Eigen::VectorXd clamp01(const Eigen::VectorXd& v) { return v.cwiseMax(0.0).cwiseMin(1.0); }

// Shared restart loop. Coordinates live in a space of dimension `dim`;
// to_point maps coordinates to a query point; to_coord_grad maps an
// input-space gradient back to coordinate space; recenter replaces the
// coordinates by those actually realized at a query point.
template <typename ToPoint, typename ToCoordGrad, typename Recenter, typename Distance>
SearchOutcome run_pgd(const PredictFn& predict, const GradientFn& grad, const Eigen::VectorXd& x, int label,
                      int dim, const PgdConfig& cfg, StreamSeed stream, ToPoint to_point, ToCoordGrad to_coord_grad,
                      Recenter recenter, Distance distance) {
    cfg.validate();
    SearchOutcome out;
    out.method = MethodKey::pgd(cfg.restarts);

    auto found_at = [&](const Eigen::VectorXd& point) {
        out.found = true;
        out.distance = distance(point);
        out.adversarial_point = point;
    };

    ++out.queries;
    if (predict(x) != label) {
        out.clean_error = true;
        out.found = true;
        out.distance = 0.0;
        out.adversarial_point = x;
        return out;
    }

    const GridSpec ball{3, cfg.epsilon, cfg.norm};
    const double alpha = cfg.alpha();
    for (int r = 0; r < cfg.restarts; ++r) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
        if (cfg.random_start) {
            c = CoordSampler(ball, dim, child(stream, "restart", static_cast<std::uint64_t>(r))).next();
            Eigen::VectorXd start = to_point(c);
            c = recenter(c, start);
            ++out.queries;
            if (predict(start) != label) {
                found_at(start);
                return out;
            }
        }
        for (int t = 0; t < cfg.steps; ++t) {
            const Eigen::VectorXd g = to_coord_grad(grad(to_point(c), label));
            c = project_coords(c + alpha * step_direction(g, cfg.norm), cfg.epsilon, cfg.norm);
            Eigen::VectorXd point = to_point(c);
            c = recenter(c, point);
            ++out.queries;
            if (predict(point) != label) {
                found_at(point);
                return out;
            }
        }
    }
    return out;
}

}  // namespace

SearchOutcome pgd_attack(const PredictFn& predict, const GradientFn& grad, const Eigen::VectorXd& x, int label,
                         const PgdConfig& cfg, StreamSeed stream) {
    const int d = static_cast<int>(x.size());
    // Perturbations are tracked after domain clamping: delta_t = x_t - x.
    return run_pgd(
        predict, grad, x, label, d, cfg, stream,
        [&](const Eigen::VectorXd& delta) { return clamp01(x + delta); },
        [](Eigen::VectorXd g) { return g; },
        [&](const Eigen::VectorXd&, const Eigen::VectorXd& point) -> Eigen::VectorXd { return point - x; },
        [&](const Eigen::VectorXd& point) { return norm_of(point - x, cfg.norm); });
}

SearchOutcome subspace_pgd(const PredictFn& predict, const GradientFn& grad, const Subspace& sub,
                           const Eigen::VectorXd& anchor, int label, const PgdConfig& cfg, StreamSeed stream) {
    if (anchor.size() != sub.dim_d()) throw std::invalid_argument("subspace_pgd: dimension mismatch");
    return run_pgd(
        predict, grad, anchor, label, sub.dim_k(), cfg, stream,
        [&](const Eigen::VectorXd& c) { return lift(sub, anchor, c, cfg.norm).point; },
        [&](const Eigen::VectorXd& g) -> Eigen::VectorXd { return sub.basis * g; },
        [](const Eigen::VectorXd& c, const Eigen::VectorXd&) { return c; },
        [&](const Eigen::VectorXd& point) { return norm_of(point - anchor, cfg.norm); });
}

}  // namespace randcheck
