#include "datev/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

namespace datev {

void validate_context(const ContextVector& phi, int dim) {
    if (static_cast<int>(phi.size()) != dim)
        throw std::domain_error("context has " + std::to_string(phi.size()) + " coordinates, expected " +
                                std::to_string(dim));
    for (double c : phi) {
        if (!(c >= 0.0 && c <= 1.0))
            throw std::domain_error("context coordinate " + std::to_string(c) + " outside [0,1]");
    }
}

CellIndex cell_of(const ContextVector& phi, int cells_per_dim) {
    if (cells_per_dim < 1) throw std::invalid_argument("cells_per_dim must be >= 1");
    CellIndex index(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        double c = phi[i];
        if (!(c >= 0.0 && c <= 1.0))
            throw std::domain_error("context coordinate " + std::to_string(c) + " outside [0,1]");
        int cell = static_cast<int>(std::floor(c * cells_per_dim));
        if (cell >= cells_per_dim) cell = cells_per_dim - 1;  // folds coord == 1.0 into the last cell
        index[i] = cell;
    }
    return index;
}

int LearnerConfig::cells_per_dim() const {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    double exponent = 1.0 / (3.0 * alpha + static_cast<double>(dim));
    // Tiny back-off before ceil so exact powers (e.g. 10^5 at exponent 1/5)
    // do not round up on the last floating-point bit.
    double h = std::ceil(std::pow(static_cast<double>(horizon), exponent) - 1e-9);
    return std::max(1, static_cast<int>(h));
}

double LearnerConfig::control(std::int64_t t) const {
    if (t < 1) throw std::invalid_argument("t must be >= 1");
    double exponent = 2.0 * alpha / (3.0 * alpha + static_cast<double>(dim));
    return std::pow(static_cast<double>(t), exponent) * std::log(static_cast<double>(t));
}

const Cell* Partition::find(const CellIndex& index) const {
    auto it = cells.find(index);
    return it == cells.end() ? nullptr : &it->second;
}

Partition partition_init(const LearnerConfig& config) {
    Partition partition;
    partition.cells_per_dim = config.cells_per_dim();
    partition.dim = config.dim;
    return partition;
}

std::vector<int> identify_underexplored(const std::vector<std::pair<int, CellIndex>>& candidates,
                                        std::int64_t t, const Partition& partition,
                                        const LearnerConfig& config) {
    double threshold = config.control(t);
    std::vector<int> out;
    for (const auto& [id, cell] : candidates) {
        const Cell* c = partition.find(cell);
        std::int64_t selected = c ? c->selected : 0;
        if (static_cast<double>(selected) <= threshold) out.push_back(id);
    }
    return out;
}

bool is_misexploitation(const std::vector<CellIndex>& decision_cells, std::int64_t t,
                        const Partition& partition, const LearnerConfig& config) {
    double threshold = config.control(t);
    for (const CellIndex& index : decision_cells) {
        const Cell* c = partition.find(index);
        std::int64_t selected = c ? c->selected : 0;
        std::int64_t observed = c ? c->observed : 0;
        if (static_cast<double>(observed) < threshold && threshold <= static_cast<double>(selected)) return true;
    }
    return false;
}

bool Learner::EventOrder::operator()(const FeedbackEvent& a, const FeedbackEvent& b) const {
    return a.ready_time > b.ready_time;  // min-heap on ready_time
}

Learner::Learner(LearnerConfig config, std::uint64_t seed)
    : config_(config), partition_(partition_init(config)), rng_(seed) {}

SelectResult Learner::select(std::int64_t task_id, const std::vector<std::pair<int, ContextVector>>& candidates,
                             std::int64_t t, int budget) {
    if (t < 1) throw std::invalid_argument("t must be >= 1");
    if (budget < 1) throw std::invalid_argument("budget must be >= 1");

    std::vector<std::pair<int, CellIndex>> cells;
    cells.reserve(candidates.size());
    std::set<int> seen;
    for (const auto& [id, phi] : candidates) {
        validate_context(phi, config_.dim);
        if (!seen.insert(id).second)
            throw std::invalid_argument("duplicate candidate id " + std::to_string(id));
        cells.emplace_back(id, cell_of(phi, partition_.cells_per_dim));
    }

    std::vector<int> underexplored = identify_underexplored(cells, t, partition_, config_);
    int z = static_cast<int>(underexplored.size());

    SelectResult result;
    result.underexplored_count = z;
    result.decision.task_id = task_id;

    if (z >= budget) {
        result.decision.phase = Phase::Exploration;
        // Partial Fisher–Yates: the first `budget` slots become a uniform
        // sample without replacement.
        for (int i = 0; i < budget; ++i) {
            std::uniform_int_distribution<int> pick(i, z - 1);
            std::swap(underexplored[i], underexplored[pick(rng_)]);
        }
        result.decision.selected.assign(underexplored.begin(), underexplored.begin() + budget);
    } else {
        QualityVector estimates;
        for (const auto& [id, cell] : cells) {
            const Cell* c = partition_.find(cell);
            estimates.set(id, c ? c->estimate() : 0.0);
        }
        RewardParams params{config_.eta};
        if (z > 0) {
            result.decision.phase = Phase::SemiExploration;
            std::vector<int> pool;
            std::set<int> under(underexplored.begin(), underexplored.end());
            for (const auto& [id, cell] : cells)
                if (!under.count(id)) pool.push_back(id);
            result.decision.selected = underexplored;
            std::vector<int> extra =
                greedy_extend(estimates, pool, underexplored, budget - z, params);
            result.decision.selected.insert(result.decision.selected.end(), extra.begin(), extra.end());
        } else {
            result.decision.phase = Phase::Exploitation;
            std::vector<int> all;
            for (const auto& [id, cell] : cells) all.push_back(id);
            result.decision = greedy_select(estimates, all, budget, params);
            result.decision.task_id = task_id;
            result.decision.phase = Phase::Exploitation;
            std::vector<CellIndex> involved;
            for (const auto& [id, cell] : cells) involved.push_back(cell);
            result.misexploitation = is_misexploitation(involved, t, partition_, config_);
        }
    }

    std::sort(result.decision.selected.begin(), result.decision.selected.end());
    for (int id : result.decision.selected) {
        auto it = std::find_if(cells.begin(), cells.end(), [&](const auto& p) { return p.first == id; });
        partition_.touch(it->second).selected += 1;
    }
    return result;
}

void Learner::observe(const FeedbackEvent& event) {
    if (event.quality != 0 && event.quality != 1)
        throw std::invalid_argument("quality must be 0 or 1");
    auto it = partition_.cells.find(event.cell);
    if (it == partition_.cells.end() || it->second.observed + 1 > it->second.selected)
        throw std::logic_error("feedback would exceed selections for its cell");
    it->second.observed += 1;
    it->second.quality_sum += static_cast<double>(event.quality);
}

void Learner::enqueue_feedback(FeedbackEvent event) {
    validate_context(event.phi, config_.dim);
    event.cell = cell_of(event.phi, partition_.cells_per_dim);
    pending_.push(std::move(event));
}

std::size_t Learner::drain_ready(double now) {
    std::size_t applied = 0;
    while (!pending_.empty() && pending_.top().ready_time <= now) {
        observe(pending_.top());
        pending_.pop();
        ++applied;
    }
    return applied;
}

void Learner::export_state_csv(std::ostream& out) const {
    out << "cell,selected,observed,quality_sum\n";
    char buf[64];
    for (const auto& [index, cell] : partition_.cells) {
        std::string key;
        for (std::size_t i = 0; i < index.size(); ++i) {
            if (i) key += ':';
            key += std::to_string(index[i]);
        }
        std::snprintf(buf, sizeof buf, "%.17g", cell.quality_sum);
        out << key << ',' << cell.selected << ',' << cell.observed << ',' << buf << '\n';
    }
}

}  // namespace datev
