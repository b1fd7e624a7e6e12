#include "randcheck/subspace.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "randcheck/errors.hpp"

namespace randcheck {

namespace {
constexpr double kRedrawThreshold = 1e-8;
constexpr double kBallSlack = 1e-12;
}  // namespace

Norm parse_norm(std::string_view text) {
    if (text == "l2" || text == "L2") return Norm::L2;
    if (text == "linf" || text == "Linf" || text == "LINF") return Norm::Linf;
    throw ConfigError("unknown norm '" + std::string(text) + "' (expected l2 or linf)");
}

std::string to_string(Norm norm) { return norm == Norm::L2 ? "l2" : "linf"; }

double norm_of(const Eigen::Ref<const Eigen::VectorXd>& v, Norm norm) {
    if (v.size() == 0) return 0.0;
    return norm == Norm::L2 ? v.norm() : v.cwiseAbs().maxCoeff();
}

void GridSpec::validate() const {
    if (bins < 3 || bins % 2 == 0) {
        throw std::invalid_argument("grid bins must be odd and >= 3, got " + std::to_string(bins));
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw std::invalid_argument("grid epsilon must be positive");
    }
}

Subspace make_basis(StreamSeed stream, int k, int d) {
    if (k < 1 || k > d) {
        throw std::invalid_argument("make_basis requires 1 <= k <= d");
    }
    Eigen::MatrixXd m(k, d);
    int accepted = 0;
    while (accepted < k) {
        Eigen::VectorXd v = gaussian_vector(stream, d, 1.0);
        for (int j = 0; j < accepted; ++j) {
            v -= m.row(j).dot(v) * m.row(j).transpose();
        }
        const double len = v.norm();
        if (len < kRedrawThreshold) continue;
        m.row(accepted++) = (v / len).transpose();
    }
    return Subspace{std::move(m)};
}

double orthonormality_error(const Subspace& sub) {
    const Eigen::MatrixXd gram = sub.basis * sub.basis.transpose();
    return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

std::uint64_t grid_product_size(int bins, int k) {
    std::uint64_t total = 1;
    for (int i = 0; i < k; ++i) {
        if (total > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(bins)) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        total *= static_cast<std::uint64_t>(bins);
    }
    return total;
}

std::vector<double> axis_values(const GridSpec& spec) {
    spec.validate();
    std::vector<double> values(spec.bins);
    const int last = spec.bins - 1;
    for (int i = 0; i < spec.bins; ++i) {
        // integer numerator: values are exactly antisymmetric and the middle one is 0
        values[i] = static_cast<double>(2 * i - last) / last * spec.epsilon;
    }
    return values;
}

std::uint64_t for_each_grid_point(const GridSpec& spec, int k,
                                  const std::function<bool(const Eigen::VectorXd&)>& visit,
                                  std::uint64_t budget_cap) {
    if (k < 1) throw std::invalid_argument("grid dimension must be positive");
    spec.validate();
    if (grid_product_size(spec.bins, k) > budget_cap) {
        throw std::invalid_argument("grid of " + std::to_string(spec.bins) + "^" + std::to_string(k) +
                                    " points exceeds the budget cap");
    }
    const std::vector<double> values = axis_values(spec);
    const double limit_sq = (spec.epsilon + kBallSlack) * (spec.epsilon + kBallSlack);

    std::vector<int> idx(k, 0);
    Eigen::VectorXd c(k);
    for (int a = 0; a < k; ++a) c[a] = values[0];
    std::uint64_t visited = 0;
    while (true) {
        if (spec.norm == Norm::Linf || c.squaredNorm() <= limit_sq) {
            ++visited;
            if (!visit(c)) return visited;
        }
        // odometer increment, last axis fastest
        int axis = k - 1;
        while (axis >= 0 && ++idx[axis] == spec.bins) {
            idx[axis] = 0;
            c[axis] = values[0];
            --axis;
        }
        if (axis < 0) break;
        c[axis] = values[idx[axis]];
    }
    return visited;
}

std::vector<Eigen::VectorXd> grid_coords(const GridSpec& spec, int k, std::uint64_t budget_cap) {
    std::vector<Eigen::VectorXd> out;
    for_each_grid_point(
        spec, k,
        [&](const Eigen::VectorXd& c) {
            out.push_back(c);
            return true;
        },
        budget_cap);
    return out;
}

std::uint64_t grid_count(const GridSpec& spec, int k, std::uint64_t budget_cap) {
    if (spec.norm == Norm::Linf) {
        spec.validate();
        const std::uint64_t n = grid_product_size(spec.bins, k);
        if (n > budget_cap) throw std::invalid_argument("grid exceeds the budget cap");
        return n;
    }
    return for_each_grid_point(spec, k, [](const Eigen::VectorXd&) { return true; }, budget_cap);
}

CoordSampler::CoordSampler(GridSpec spec, int k, StreamSeed stream)
    : spec_(spec), k_(k), stream_(stream) {
    if (k < 1) throw std::invalid_argument("sample dimension must be positive");
    if (!(spec.epsilon > 0.0)) throw std::invalid_argument("sample epsilon must be positive");
}

Eigen::VectorXd CoordSampler::next() {
    const double eps = spec_.epsilon;
    Eigen::VectorXd c(k_);
    if (spec_.norm == Norm::Linf) {
        for (int i = 0; i < k_; ++i) {
            c[i] = std::min(eps, -eps + 2.0 * eps * next_uniform(stream_));
        }
        return c;
    }
    Eigen::VectorXd dir;
    double len = 0.0;
    do {
        dir = gaussian_vector(stream_, k_, 1.0);
        len = dir.norm();
    } while (len == 0.0);
    const double radius = eps * std::pow(next_uniform(stream_), 1.0 / k_);
    c = dir * (radius / len);
    while (c.norm() > eps) {
        c *= 1.0 - std::numeric_limits<double>::epsilon();
    }
    return c;
}

std::vector<Eigen::VectorXd> sample_coords(const GridSpec& spec, int k, int count, StreamSeed stream) {
    if (count < 1) throw std::invalid_argument("sample count must be positive");
    CoordSampler sampler(spec, k, stream);
    std::vector<Eigen::VectorXd> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(sampler.next());
    return out;
}

Lifted lift(const Subspace& sub, const Eigen::VectorXd& anchor, const Eigen::VectorXd& c, Norm norm) {
    if (anchor.size() != sub.dim_d() || c.size() != sub.dim_k()) {
        throw std::invalid_argument("lift: dimension mismatch");
    }
    Lifted out;
    out.point = (anchor + sub.basis.transpose() * c).cwiseMax(0.0).cwiseMin(1.0);
    out.achieved_distance = norm_of(out.point - anchor, norm);
    return out;
}

Eigen::VectorXd project_coords(const Eigen::VectorXd& c, double epsilon, Norm norm) {
    if (norm == Norm::Linf) {
        return c.cwiseMax(-epsilon).cwiseMin(epsilon);
    }
    const double len = c.norm();
    if (len > epsilon) {
        Eigen::VectorXd out = c * (epsilon / len);
        while (out.norm() > epsilon) out *= 1.0 - std::numeric_limits<double>::epsilon();
        return out;
    }
    return c;
}

}  // namespace randcheck
