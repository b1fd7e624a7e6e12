#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "randcheck/rng.hpp"

namespace randcheck {

enum class Norm { L2, Linf };

Norm parse_norm(std::string_view text);  // "l2" | "linf"
std::string to_string(Norm norm);

double norm_of(const Eigen::Ref<const Eigen::VectorXd>& v, Norm norm);

// Orthonormal K x D basis. Rows are the basis vectors.
struct Subspace {
    Eigen::MatrixXd basis;

    int dim_k() const { return static_cast<int>(basis.rows()); }
    int dim_d() const { return static_cast<int>(basis.cols()); }
};

struct GridSpec {
    int bins = 3;  // B, odd and >= 3
    double epsilon = 0.5;
    Norm norm = Norm::L2;

    void validate() const;
};

inline constexpr std::uint64_t kDefaultGridBudget = 100'000'000;

//---------------------------------------------------------------------------//
/*!
 * \brief Draw a random K-dimensional orthonormal basis of R^D.
 *
 * K Gaussian vectors are orthogonalized with modified Gram-Schmidt; a vector
 * whose residual norm falls below 1e-8 is replaced by a fresh draw from the
 * same stream.
 */
Subspace make_basis(StreamSeed stream, int k, int d);

// Largest |(M M^T - I)_ij|.
double orthonormality_error(const Subspace& sub);

// B^K as an exact integer, saturating at UINT64_MAX.
std::uint64_t grid_product_size(int bins, int k);

// Per-axis coordinates -eps + 2 eps i / (B - 1), i = 0..B-1.
std::vector<double> axis_values(const GridSpec& spec);

/*!
 * \brief Visit grid points in row-major order (first axis slowest).
 *
 * Under L2 the Cartesian product is filtered to the closed eps-ball. The
 * visitor returns false to stop early. Returns the number of points visited.
 * Throws std::invalid_argument if B^K exceeds \p budget_cap.
 */
std::uint64_t for_each_grid_point(const GridSpec& spec, int k,
                                  const std::function<bool(const Eigen::VectorXd&)>& visit,
                                  std::uint64_t budget_cap = kDefaultGridBudget);

std::vector<Eigen::VectorXd> grid_coords(const GridSpec& spec, int k,
                                         std::uint64_t budget_cap = kDefaultGridBudget);

std::uint64_t grid_count(const GridSpec& spec, int k, std::uint64_t budget_cap = kDefaultGridBudget);

// Streaming form of sample_coords: each next() yields the same sequence.
class CoordSampler {
  public:
    CoordSampler(GridSpec spec, int k, StreamSeed stream);
    Eigen::VectorXd next();

  private:
    GridSpec spec_;
    int k_;
    StreamSeed stream_;
};

// Linf: uniform in the cube. L2: uniform in the ball (radius eps * u^(1/k)).
std::vector<Eigen::VectorXd> sample_coords(const GridSpec& spec, int k, int count, StreamSeed stream);

struct Lifted {
    Eigen::VectorXd point;
    double achieved_distance = 0.0;
};

// anchor + M^T c, clamped to [0,1]^D; distance measured after clamping.
Lifted lift(const Subspace& sub, const Eigen::VectorXd& anchor, const Eigen::VectorXd& c,
            Norm norm = Norm::L2);

Eigen::VectorXd project_coords(const Eigen::VectorXd& c, double epsilon, Norm norm);

}  // namespace randcheck
