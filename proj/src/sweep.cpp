#include "randcheck/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "randcheck/errors.hpp"
#include "randcheck/parallel.hpp"

namespace randcheck {

std::vector<std::pair<int, int>> default_dims_bins() { return {{1, 1001}, {2, 51}, {3, 21}, {4, 11}, {5, 9}, {6, 9}}; }

void SweepPlan::validate() const {
    if (dims_bins.empty()) throw ConfigError("sweep plan has no (dims, bins) rows");
    if (methods.empty()) throw ConfigError("sweep plan has no methods");
    if (!(epsilon > 0.0)) throw ConfigError("sweep epsilon must be positive");
    for (const auto& [k, b] : dims_bins) {
        if (k < 1) throw ConfigError("sweep dims must be positive");
        if (b < 3 || b % 2 == 0) throw ConfigError("sweep bins must be odd and >= 3");
        if (grid_product_size(b, k) > budget_cap) throw ConfigError("sweep grid exceeds the budget cap");
    }
    std::set<MethodKey> seen;
    for (const MethodKey& m : methods) {
        if (!seen.insert(m).second) throw ConfigError("duplicate sweep method " + to_string(m));
    }
    pgd_config(1).validate();
}

PgdConfig SweepPlan::pgd_config(int restarts) const {
    PgdConfig cfg;
    cfg.epsilon = epsilon;
    cfg.norm = norm;
    cfg.steps = pgd_steps;
    cfg.step_size = pgd_step_size;
    cfg.restarts = restarts;
    cfg.random_start = pgd_random_start;
    return cfg;
}

void require_deterministic(const Classifier& clf, const Eigen::VectorXd& x) {
    if (clf.stochastic()) {
        throw PreconditionError("grid sweep requires a deterministic classifier; determinize it first");
    }
    if (clf.predict(x, 0) != clf.predict(x, 1)) {
        throw PreconditionError("classifier gave different labels on repeated queries of the same input");
    }
}

namespace {

SweepCell scan_cell(MethodKey key, int dims, int bins, int id) {
    SweepCell cell;
    cell.dims = dims;
    cell.bins = bins;
    cell.outcome.datapoint_id = id;
    cell.outcome.method = key;
    return cell;
}

// Shared grid/random evaluation of one candidate. Returns false to stop.
bool visit_candidate(const Classifier& clf, const Subspace& sub, const Eigen::VectorXd& x, int label,
                     const Eigen::VectorXd& c, const SweepPlan& plan, SweepCell& cell) {
    Lifted lifted = lift(sub, x, c, plan.norm);
    ++cell.outcome.queries;
    if (clf.predict(lifted.point, 0) != label) {
        ++cell.hits;
        if (!cell.outcome.found) {
            cell.outcome.found = true;
            cell.outcome.distance = lifted.achieved_distance;
            cell.outcome.adversarial_point = std::move(lifted.point);
        }
        return plan.exhaustive;
    }
    return true;
}

}  // namespace

std::map<MethodKey, SweepCell> sweep_datapoint(const Classifier& clf, const Eigen::VectorXd& x, int label,
                                               int datapoint_id, const SweepPlan& plan, int dims, int bins) {
    require_deterministic(clf, x);
    if (x.size() != clf.input_dim()) throw std::invalid_argument("sweep_datapoint: dimension mismatch");
    if (dims > x.size()) throw ConfigError("subspace dimension exceeds input dimension");
    const GridSpec spec{bins, plan.epsilon, plan.norm};
    spec.validate();
    if (grid_product_size(bins, dims) > plan.budget_cap) {
        throw std::invalid_argument("grid exceeds the budget cap");
    }

    std::map<MethodKey, SweepCell> out;
    if (clf.predict(x, 0) != label) {
        for (const MethodKey& m : plan.methods) {
            SweepCell cell = scan_cell(m, dims, bins, datapoint_id);
            cell.outcome.found = true;
            cell.outcome.clean_error = true;
            cell.outcome.distance = 0.0;
            cell.outcome.adversarial_point = x;
            cell.outcome.queries = 1;
            out.emplace(m, std::move(cell));
        }
        return out;
    }

    const StreamSeed point_stream = derive_stream(plan.seed, {{"datapoint", static_cast<std::uint64_t>(datapoint_id)}});
    const StreamSeed dims_stream = child(point_stream, "dims", static_cast<std::uint64_t>(dims));
    const Subspace sub = make_basis(child(point_stream, "basis", static_cast<std::uint64_t>(dims)), dims,
                                    static_cast<int>(x.size()));

    std::uint64_t grid_points = 0;
    bool need_count = true;
    for (const MethodKey& m : plan.methods) {
        SweepCell cell = scan_cell(m, dims, bins, datapoint_id);
        switch (m.method) {
            case SearchMethod::Grid:
                for_each_grid_point(
                    spec, dims, [&](const Eigen::VectorXd& c) { return visit_candidate(clf, sub, x, label, c, plan, cell); },
                    plan.budget_cap);
                break;
            case SearchMethod::Random: {
                if (need_count) {
                    grid_points = grid_count(spec, dims, plan.budget_cap);
                    need_count = false;
                }
                CoordSampler sampler(spec, dims, child(dims_stream, "random", 0));
                for (std::uint64_t i = 0; i < grid_points; ++i) {
                    if (!visit_candidate(clf, sub, x, label, sampler.next(), plan, cell)) break;
                }
                break;
            }
            case SearchMethod::Pgd: {
                const AttackTarget target = make_target(clf);
                cell.outcome = subspace_pgd(target.predict, target.gradient, sub, x, label, plan.pgd_config(m.restarts),
                                            child(dims_stream, "pgd", 0));
                cell.outcome.datapoint_id = datapoint_id;
                cell.outcome.method = m;
                cell.hits = cell.outcome.found ? 1 : 0;
                break;
            }
        }
        out.emplace(m, std::move(cell));
    }
    return out;
}

std::vector<SweepCell> run_sweep(const Classifier& clf, const Dataset& data, const std::vector<int>& datapoint_ids,
                                 const SweepPlan& plan, int workers) {
    plan.validate();
    for (int id : datapoint_ids) {
        if (id < 0 || id >= data.size()) throw ConfigError("sweep datapoint id out of range");
    }
    const std::size_t rows = plan.dims_bins.size();
    const std::size_t tasks = datapoint_ids.size() * rows;
    std::vector<std::vector<SweepCell>> slots(tasks);
    parallel_for(tasks, workers, [&](std::size_t t) {
        const int id = datapoint_ids[t / rows];
        const auto [dims, bins] = plan.dims_bins[t % rows];
        const Eigen::VectorXd x = data.points.row(id).transpose();
        auto cells = sweep_datapoint(clf, x, data.labels[id], id, plan, dims, bins);
        for (const MethodKey& m : plan.methods) slots[t].push_back(std::move(cells.at(m)));
    });
    std::vector<SweepCell> out;
    out.reserve(tasks * plan.methods.size());
    for (auto& s : slots) {
        for (auto& c : s) out.push_back(std::move(c));
    }
    return out;
}

//---------------------------------------------------------------------------//
// Tables
//---------------------------------------------------------------------------//

namespace {

TableRow make_row(int dims, int bins, const std::vector<MethodKey>& methods,
                  const std::map<MethodKey, std::set<int>>& found) {
    TableRow row;
    row.dims = dims;
    row.bins = bins;
    std::set<int> all;
    for (const MethodKey& m : methods) {
        const auto it = found.find(m);
        const int n = it == found.end() ? 0 : static_cast<int>(it->second.size());
        row.found[m] = n;
        if (it != found.end()) all.insert(it->second.begin(), it->second.end());
    }
    row.union_size = static_cast<int>(all.size());
    row.empty_union = all.empty();
    for (const MethodKey& m : methods) {
        row.fraction[m] = row.empty_union ? 1.0 : static_cast<double>(row.found[m]) / row.union_size;
    }
    return row;
}

}  // namespace

VulnerabilityTable union_fraction_table(const std::vector<SweepCell>& cells, const std::string& model_tag,
                                        bool include_clean_errors) {
    VulnerabilityTable table;
    table.model_tag = model_tag;
    table.clean_errors_included = include_clean_errors;

    std::vector<std::pair<int, int>> row_keys;
    std::set<MethodKey> method_set;
    std::map<std::pair<int, int>, std::map<MethodKey, std::set<int>>> coverage;
    std::set<int> clean_error_ids;
    std::set<int> all_ids;
    for (const SweepCell& c : cells) {
        const std::pair<int, int> key{c.dims, c.bins};
        if (std::find(row_keys.begin(), row_keys.end(), key) == row_keys.end()) row_keys.push_back(key);
        if (method_set.insert(c.outcome.method).second) table.methods.push_back(c.outcome.method);
        if (!coverage[key][c.outcome.method].insert(c.outcome.datapoint_id).second) {
            throw std::invalid_argument("duplicate outcome for datapoint " + std::to_string(c.outcome.datapoint_id));
        }
        if (c.outcome.clean_error) clean_error_ids.insert(c.outcome.datapoint_id);
        all_ids.insert(c.outcome.datapoint_id);
    }
    std::sort(table.methods.begin(), table.methods.end());
    for (const auto& [key, per_method] : coverage) {
        for (const MethodKey& m : table.methods) {
            const auto it = per_method.find(m);
            if (it == per_method.end() || it->second != all_ids) {
                throw std::invalid_argument("outcomes do not cover identical datapoints for every method and row");
            }
        }
    }
    table.datapoints = static_cast<int>(all_ids.size());
    table.clean_errors = static_cast<int>(clean_error_ids.size());

    std::map<std::pair<int, int>, std::map<MethodKey, std::set<int>>> found;
    std::map<MethodKey, std::set<int>> found_any;
    for (const SweepCell& c : cells) {
        if (!c.outcome.found) continue;
        if (!include_clean_errors && clean_error_ids.count(c.outcome.datapoint_id)) continue;
        found[{c.dims, c.bins}][c.outcome.method].insert(c.outcome.datapoint_id);
        found_any[c.outcome.method].insert(c.outcome.datapoint_id);
    }
    for (const auto& key : row_keys) {
        table.rows.push_back(make_row(key.first, key.second, table.methods, found[key]));
    }
    table.rows.push_back(make_row(0, 0, table.methods, found_any));
    return table;
}

std::string to_string(Verdict::Kind kind) {
    switch (kind) {
        case Verdict::Kind::SuspectedObfuscation: return "suspected obfuscated gradients";
        case Verdict::Kind::GradientsUnhindered: return "gradients unhindered";
        case Verdict::Kind::Inconclusive: return "inconclusive";
    }
    return "?";
}

Verdict obfuscation_verdict(const VulnerabilityTable& table, double margin) {
    if (table.rows.empty()) throw std::invalid_argument("verdict needs a non-empty table");
    const TableRow& s = table.summary();
    const auto grid = s.fraction.find(MethodKey::grid());
    if (grid == s.fraction.end()) throw std::invalid_argument("verdict needs a grid-sweep column");
    int max_restarts = 0;
    for (const auto& [m, f] : s.fraction) {
        if (m.method == SearchMethod::Pgd) max_restarts = std::max(max_restarts, m.restarts);
    }
    if (max_restarts == 0) throw std::invalid_argument("verdict needs at least one PGD column");

    Verdict v;
    v.margin = margin;
    v.grid_fraction = grid->second;
    v.pgd_restarts = max_restarts;
    v.pgd_fraction = s.fraction.at(MethodKey::pgd(max_restarts));
    if (s.empty_union) {
        v.kind = Verdict::Kind::Inconclusive;
    } else if (v.pgd_fraction < v.grid_fraction - margin) {
        v.kind = Verdict::Kind::SuspectedObfuscation;
    } else if (max_restarts >= 10) {
        v.kind = Verdict::Kind::GradientsUnhindered;
    } else {
        v.kind = Verdict::Kind::Inconclusive;
    }
    return v;
}

std::string column_name(MethodKey key) {
    switch (key.method) {
        case SearchMethod::Grid: return "Grid-sweep";
        case SearchMethod::Random: return "Rand-sample";
        case SearchMethod::Pgd: return "PGD" + std::to_string(key.restarts);
    }
    return "?";
}

std::string table_csv(const VulnerabilityTable& table) {
    std::ostringstream os;
    os << "Dims,Bins";
    for (const MethodKey& m : table.methods) os << ',' << column_name(m);
    os << '\n';
    char buf[32];
    for (const TableRow& row : table.rows) {
        if (row.dims == 0) {
            os << "all,-";
        } else {
            os << row.dims << ',' << row.bins;
        }
        for (const MethodKey& m : table.methods) {
            std::snprintf(buf, sizeof buf, "%.17g", row.fraction.at(m));
            os << ',' << buf;
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace randcheck
