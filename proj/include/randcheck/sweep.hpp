#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "randcheck/attacks.hpp"
#include "randcheck/classifier.hpp"
#include "randcheck/model.hpp"
#include "randcheck/subspace.hpp"

namespace randcheck {

// Subspace dimensions and bins searched in the reference case study.
std::vector<std::pair<int, int>> default_dims_bins();

struct SweepPlan {
    std::vector<std::pair<int, int>> dims_bins = default_dims_bins();  // (K, B)
    double epsilon = 0.5;
    Norm norm = Norm::L2;
    std::vector<MethodKey> methods = {MethodKey::grid(), MethodKey::random(), MethodKey::pgd(1),
                                      MethodKey::pgd(10), MethodKey::pgd(20)};
    std::uint64_t seed = 0;
    int pgd_steps = 40;
    std::optional<double> pgd_step_size;
    bool pgd_random_start = true;
    bool exhaustive = false;  // keep scanning grid/random after the first hit
    std::uint64_t budget_cap = kDefaultGridBudget;

    void validate() const;
    PgdConfig pgd_config(int restarts) const;
};

struct SweepCell {
    int dims = 0;
    int bins = 0;
    SearchOutcome outcome;
    std::int64_t hits = 0;  // misclassified points seen by grid/random scans
};

// Throws PreconditionError unless the classifier is deterministic, judged by
// its declared behaviour and by two probe predictions on x.
void require_deterministic(const Classifier& clf, const Eigen::VectorXd& x);

/*!
 * \brief Search one (datapoint, K, B) cell with every planned method.
 *
 * The basis comes from derive(seed, ("datapoint", id), ("basis", K)); the
 * random baseline draws as many samples as the grid has points; PGD runs
 * share restart streams across restart budgets.
 */
std::map<MethodKey, SweepCell> sweep_datapoint(const Classifier& clf, const Eigen::VectorXd& x, int label,
                                               int datapoint_id, const SweepPlan& plan, int dims, int bins);

// All cells for the given datapoints, ordered by (datapoint, plan row, method).
std::vector<SweepCell> run_sweep(const Classifier& clf, const Dataset& data, const std::vector<int>& datapoint_ids,
                                 const SweepPlan& plan, int workers = 1);

struct TableRow {
    int dims = 0;  // 0 marks the summary row
    int bins = 0;
    std::map<MethodKey, int> found;
    std::map<MethodKey, double> fraction;
    int union_size = 0;
    bool empty_union = false;
};

struct VulnerabilityTable {
    std::string model_tag;
    std::vector<MethodKey> methods;
    std::vector<TableRow> rows;  // per-(K, B) rows in plan order, summary last
    int datapoints = 0;
    int clean_errors = 0;
    bool clean_errors_included = false;

    const TableRow& summary() const { return rows.back(); }
};

VulnerabilityTable union_fraction_table(const std::vector<SweepCell>& cells, const std::string& model_tag,
                                        bool include_clean_errors = false);

struct Verdict {
    enum class Kind { SuspectedObfuscation, GradientsUnhindered, Inconclusive };
    Kind kind = Kind::Inconclusive;
    double grid_fraction = 0.0;
    double pgd_fraction = 0.0;  // at the largest restart budget
    int pgd_restarts = 0;
    double margin = 0.1;
};

std::string to_string(Verdict::Kind kind);

// Suspected obfuscation if pgd(max restarts) < grid - margin; unhindered if
// the largest budget is >= 10 restarts and no gap; inconclusive otherwise,
// including when no method found anything.
Verdict obfuscation_verdict(const VulnerabilityTable& table, double margin = 0.1);

// CSV in the Dims,Bins,Grid-sweep,Rand-sample,PGD1,... layout.
std::string table_csv(const VulnerabilityTable& table);
std::string column_name(MethodKey key);

}  // namespace randcheck
