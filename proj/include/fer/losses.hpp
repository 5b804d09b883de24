#pragma once

#include <array>
#include <functional>
#include <vector>

#include "fer/dataset.hpp"
#include "fer/model_pool.hpp"

namespace fer {

/// Coherence weights: temporal, part, appearance-shape.
struct LossWeights {
    double lambda_t = 0.0;
    double lambda_c = 0.0;
    double lambda_r = 0.0;
};

/// Per-batch normalization divides every term by its own number of
/// contributing summands so the lambda semantics do not depend on batch
/// composition; raw-sum reproduces the plain sums of the objective.
enum class LossNormalization { PerBatch, RawSum };

/// The seven objective terms, in fixed order.
enum TermIndex : int {
    kCeApp = 0,
    kCeShape,
    kTempApp,
    kTempShape,
    kPartApp,
    kPartShape,
    kAppShape,
    kTermCount,
};
const char* term_name(int term);

struct LossBreakdown {
    std::array<double, kTermCount> terms{};        // normalized values
    std::array<long long, kTermCount> counts{};    // contributing summands
    double total = 0.0;

    double ce_app() const { return terms[kCeApp]; }
    double ce_shape() const { return terms[kCeShape]; }
    double temporal_app() const { return terms[kTempApp]; }
    double temporal_shape() const { return terms[kTempShape]; }
    double part_app() const { return terms[kPartApp]; }
    double part_shape() const { return terms[kPartShape]; }
    double app_shape() const { return terms[kAppShape]; }
};

/// Combination coefficients of Eq. (5): CE terms weigh 1, temporal terms
/// lambda_t, part terms lambda_c, the appearance-shape term lambda_r.
std::array<double, kTermCount> term_coefficients(const LossWeights& w);

/// 1 - p'q, the shared kernel of all three coherence penalties. Lies in
/// [0,1] for simplex inputs; 0 only for identical one-hot pairs.
double pair_incoherence(const std::array<double, 7>& p, const std::array<double, 7>& q);

/// One frame slot inside a batch group.
struct BatchFrame {
    const FrameRecord* frame = nullptr;
    Label label = Label::none;
    double weight = 0.0;  // class_weight(label)
};

/// A consecutive run of frames from one video (singleton or adjacent pair);
/// consecutive entries are temporal neighbours.
struct BatchGroup {
    std::vector<BatchFrame> frames;
};

struct Batch {
    std::vector<BatchGroup> groups;
};

BatchFrame make_batch_frame(const FrameRecord& frame);

/// Which of the 15 networks participate in the loss.
struct ActiveSet {
    std::array<bool, kRepresentationCount> on{};

    static ActiveSet all();
    static ActiveSet of(const std::vector<RepId>& reps);
    bool has(RepId id) const { return on[static_cast<std::size_t>(rep_index(id))]; }
    std::vector<RepId> reps() const;
};

/// Builds and differentiates the full objective over a batch. Terms whose
/// lambda is zero are skipped entirely (their networks are not even run on
/// frames that contribute nothing else), which makes the lambda=0 case
/// literally supervised cross-entropy.
class PoolLossComputer {
public:
    PoolLossComputer(ModelPool& pool, LossWeights weights, LossNormalization norm, ActiveSet active);

    const LossWeights& weights() const { return weights_; }
    const ActiveSet& active() const { return active_; }

    /// One differentiable graph over the whole batch. Intended for small
    /// batches (gradient checking, tests); training uses the streaming path.
    TensorPtr total_loss_graph(const Batch& batch, LossBreakdown* breakdown = nullptr);

    /// Forward+backward one group at a time, accumulating parameter
    /// gradients; equals the monolithic graph up to summation order.
    /// Gradients are scaled by grad_scale (callers pass 1).
    LossBreakdown backward_accumulate(const Batch& batch, double grad_scale = 1.0);

    /// Value-only breakdown from external distributions (no autodiff).
    using DistGetter =
        std::function<std::array<double, 7>(RepId rep, int group, int pos)>;
    LossBreakdown evaluate(const Batch& batch, const DistGetter& dist) const;

    /// Summand counts per term over the whole batch.
    std::array<long long, kTermCount> count_terms(const Batch& batch) const;

private:
    ModelPool* pool_;
    LossWeights weights_;
    LossNormalization norm_;
    ActiveSet active_;
};

/// Value-only pool loss with per-network memoization: evaluating after a
/// perturbation of one network's parameters recomputes only that network's
/// forward passes. Backs the finite-difference acceptance check, where the
/// loss is evaluated thousands of times with single-coordinate changes.
class CachingPoolLoss {
public:
    CachingPoolLoss(ModelPool& pool, const Batch& batch, LossWeights weights,
                    LossNormalization norm, ActiveSet active);

    double value();
    LossBreakdown breakdown();
    void mark_dirty(RepId id);
    void mark_all_dirty();

private:
    void refresh();

    ModelPool* pool_;
    Batch batch_;
    PoolLossComputer computer_;
    // Representations and distributions per (rep, flat frame slot).
    std::vector<std::vector<RepresentationImage>> reps_;
    std::vector<std::vector<std::array<double, 7>>> dists_;
    std::vector<std::vector<char>> needed_;
    std::array<bool, kRepresentationCount> dirty_{};
    std::vector<int> group_offset_;
};

}  // namespace fer
