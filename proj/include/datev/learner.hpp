#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <vector>

#include "datev/reward.hpp"

namespace datev {

/// Context of one replication, every coordinate normalized into [0,1].
using ContextVector = std::vector<double>;

/// Index of one hypercube of the partition, one entry per dimension.
using CellIndex = std::vector<int>;

/// Throws std::domain_error if a coordinate is outside [0,1] or the length
/// does not match `dim`.
void validate_context(const ContextVector& phi, int dim);

/// Maps a context to its hypercube: per dimension floor(coord * h), with
/// coord == 1.0 folded into the last cell (intervals are [i/h, (i+1)/h),
/// the final one closed).
CellIndex cell_of(const ContextVector& phi, int cells_per_dim);

struct LearnerConfig {
    std::int64_t horizon = 1;   // T, number of tasks, required up front
    double alpha = 1.0;         // smoothness exponent of the quality function
    int dim = 2;                // context dimension D
    double eta = 0.1;           // unit replication cost
    double holder_const = 1.0;  // L, used by tests and diagnostics only

    /// h_T = ceil(T^{1/(3 alpha + D)}), at least 1.
    int cells_per_dim() const;

    /// Control threshold K(t) = t^{2 alpha/(3 alpha + D)} * ln(t). Cells whose
    /// selection counter is <= K(t) count as under-explored. Natural log.
    double control(std::int64_t t) const;
};

/// Per-hypercube statistics. `selected` counts replications chosen from the
/// cell (incremented at decision time), `observed` counts qualities that have
/// arrived. observed <= selected always.
struct Cell {
    std::int64_t selected = 0;   // C(p)
    std::int64_t observed = 0;   // M(p)
    double quality_sum = 0.0;

    double estimate() const { return observed > 0 ? quality_sum / static_cast<double>(observed) : 0.0; }
};

/// Lazily materialized uniform partition of [0,1]^D. Absent cells behave as
/// C = M = 0 with estimate 0.
struct Partition {
    int cells_per_dim = 1;
    int dim = 1;
    std::map<CellIndex, Cell> cells;

    const Cell* find(const CellIndex& index) const;
    Cell& touch(const CellIndex& index) { return cells[index]; }
};

Partition partition_init(const LearnerConfig& config);

/// One realized replication quality that becomes observable at ready_time.
struct FeedbackEvent {
    std::int64_t task_id = 0;
    int candidate = 0;
    ContextVector phi;
    CellIndex cell;       // filled by the learner when the event is enqueued
    int quality = 0;      // 0 or 1
    double ready_time = 0.0;
};

/// Ids of the candidates whose cell counter satisfies C(p) <= K(t).
std::vector<int> identify_underexplored(const std::vector<std::pair<int, CellIndex>>& candidates,
                                        std::int64_t t, const Partition& partition,
                                        const LearnerConfig& config);

/// True iff some involved cell has M(p) < K(t) <= C(p). Only meaningful for
/// exploitation rounds; a metric, never an input to selection.
bool is_misexploitation(const std::vector<CellIndex>& decision_cells, std::int64_t t,
                        const Partition& partition, const LearnerConfig& config);

struct SelectResult {
    ReplicationDecision decision;
    int underexplored_count = 0;  // z
    bool misexploitation = false;
};

/// The partition-based contextual-combinatorial learner. Single-owner mutable
/// state: select/observe/drain must be serialized per instance.
class Learner {
public:
    Learner(LearnerConfig config, std::uint64_t seed);

    const LearnerConfig& config() const { return config_; }
    const Partition& partition() const { return partition_; }

    /// Chooses up to `budget` replications for task `t` from candidates given
    /// as (id, context) pairs. Under-explored candidates are forced in first;
    /// any remaining budget is filled greedily with cell estimates. Cell
    /// selection counters are incremented here, at decision time.
    SelectResult select(std::int64_t task_id, const std::vector<std::pair<int, ContextVector>>& candidates,
                        std::int64_t t, int budget);

    /// Applies one quality observation to its cell: M += 1 and the running
    /// quality sum is extended. Throws std::logic_error if M would exceed C.
    void observe(const FeedbackEvent& event);

    /// Queues an event for a later drain; the cell index is filled in here.
    void enqueue_feedback(FeedbackEvent event);

    /// Applies every queued event with ready_time <= now. Returns the count.
    std::size_t drain_ready(double now);

    std::size_t pending_feedback() const { return pending_.size(); }

    /// Flat (cell, C, M, quality_sum) table for debugging and golden tests.
    void export_state_csv(std::ostream& out) const;

private:
    struct EventOrder {
        bool operator()(const FeedbackEvent& a, const FeedbackEvent& b) const;
    };

    LearnerConfig config_;
    Partition partition_;
    std::mt19937_64 rng_;
    std::priority_queue<FeedbackEvent, std::vector<FeedbackEvent>, EventOrder> pending_;
};

}  // namespace datev
