#include "fer/losses.hpp"

#include <algorithm>
#include <cmath>

#include "fer/error.hpp"
#include "fer/ops.hpp"

namespace fer {

namespace {

constexpr double kLogClamp = 1e-12;  // the only nonlinearity guard in the objective

const std::array<Part, 6> kNonFaceAppearanceParts = {Part::Mouth,       Part::LeftEye,
                                                     Part::RightEye,    Part::LeftEyebrow,
                                                     Part::RightEyebrow, Part::Nose};
const std::array<Part, 7> kNonFaceShapeParts = {Part::Mouth,        Part::LeftEye,
                                                Part::RightEye,     Part::LeftEyebrow,
                                                Part::RightEyebrow, Part::Nose,
                                                Part::Jaw};
const std::array<Part, 7> kNonJawParts = {Part::Face,         Part::Mouth,
                                          Part::LeftEye,      Part::RightEye,
                                          Part::LeftEyebrow,  Part::RightEyebrow,
                                          Part::Nose};

/// Walks every objective summand of one batch group.
///   ce(term, rep, pos, class0, weight)      for labeled-frame cross-entropy
///   pair(term, repA, posA, repB, posB)      for the three coherence penalties
/// Terms with a zero lambda are not enumerated, so their networks are never
/// evaluated on frames nothing else needs.
template <class CeFn, class PairFn>
void enumerate_group(const BatchGroup& group, const ActiveSet& active, const LossWeights& w,
                     CeFn&& ce, PairFn&& pair) {
    const int n = static_cast<int>(group.frames.size());

    for (const RepId rep : all_representations()) {
        if (!active.has(rep)) continue;
        const int term = rep.kind == RepKind::Appearance ? kCeApp : kCeShape;
        for (int pos = 0; pos < n; ++pos) {
            const BatchFrame& f = group.frames[static_cast<std::size_t>(pos)];
            if (f.label != Label::none) ce(term, rep, pos, label_index(f.label) - 1, f.weight);
        }
    }

    if (w.lambda_t != 0.0) {
        for (const RepId rep : all_representations()) {
            if (!active.has(rep)) continue;
            const int term = rep.kind == RepKind::Appearance ? kTempApp : kTempShape;
            for (int pos = 1; pos < n; ++pos) pair(term, rep, pos - 1, rep, pos);
        }
    }

    if (w.lambda_c != 0.0) {
        for (const RepKind kind : {RepKind::Appearance, RepKind::Shape}) {
            const RepId face{Part::Face, kind};
            if (!active.has(face)) continue;
            const int term = kind == RepKind::Appearance ? kPartApp : kPartShape;
            const auto parts = kind == RepKind::Appearance
                                   ? std::vector<Part>(kNonFaceAppearanceParts.begin(),
                                                       kNonFaceAppearanceParts.end())
                                   : std::vector<Part>(kNonFaceShapeParts.begin(),
                                                       kNonFaceShapeParts.end());
            for (const Part part : parts) {
                const RepId other{part, kind};
                if (!active.has(other)) continue;
                for (int pos = 0; pos < n; ++pos) pair(term, face, pos, other, pos);
            }
        }
    }

    if (w.lambda_r != 0.0) {
        for (const Part part : kNonJawParts) {
            const RepId app{part, RepKind::Appearance};
            const RepId shape{part, RepKind::Shape};
            if (!active.has(app) || !active.has(shape)) continue;
            for (int pos = 0; pos < n; ++pos) pair(kAppShape, app, pos, shape, pos);
        }
    }
}

}  // namespace

const char* term_name(int term) {
    switch (term) {
        case kCeApp: return "ce_app";
        case kCeShape: return "ce_shape";
        case kTempApp: return "temporal_app";
        case kTempShape: return "temporal_shape";
        case kPartApp: return "part_app";
        case kPartShape: return "part_shape";
        case kAppShape: return "app_shape";
    }
    return "?";
}

std::array<double, kTermCount> term_coefficients(const LossWeights& w) {
    return {1.0, 1.0, w.lambda_t, w.lambda_t, w.lambda_c, w.lambda_c, w.lambda_r};
}

double pair_incoherence(const std::array<double, 7>& p, const std::array<double, 7>& q) {
    double dot = 0.0;
    for (int i = 0; i < 7; ++i) dot += p[static_cast<std::size_t>(i)] * q[static_cast<std::size_t>(i)];
    return 1.0 - dot;
}

BatchFrame make_batch_frame(const FrameRecord& frame) {
    return {&frame, frame.label, class_weight(frame.label)};
}

ActiveSet ActiveSet::all() {
    ActiveSet s;
    s.on.fill(true);
    return s;
}

ActiveSet ActiveSet::of(const std::vector<RepId>& reps) {
    ActiveSet s;
    for (const RepId id : reps) s.on[static_cast<std::size_t>(rep_index(id))] = true;
    return s;
}

std::vector<RepId> ActiveSet::reps() const {
    std::vector<RepId> out;
    for (int i = 0; i < kRepresentationCount; ++i)
        if (on[static_cast<std::size_t>(i)]) out.push_back(all_representations()[static_cast<std::size_t>(i)]);
    return out;
}

PoolLossComputer::PoolLossComputer(ModelPool& pool, LossWeights weights, LossNormalization norm,
                                   ActiveSet active)
    : pool_(&pool), weights_(weights), norm_(norm), active_(active) {
    if (weights.lambda_t < 0 || weights.lambda_c < 0 || weights.lambda_r < 0)
        throw config_error("loss weights must be nonnegative");
}

std::array<long long, kTermCount> PoolLossComputer::count_terms(const Batch& batch) const {
    std::array<long long, kTermCount> counts{};
    for (const auto& group : batch.groups)
        enumerate_group(
            group, active_, weights_,
            [&](int term, RepId, int, int, double) { ++counts[static_cast<std::size_t>(term)]; },
            [&](int term, RepId, int, RepId, int) { ++counts[static_cast<std::size_t>(term)]; });
    return counts;
}

namespace {

/// Per-group forward pass over exactly the (rep, pos) slots some term needs.
struct GroupForward {
    std::array<std::vector<TensorPtr>, kRepresentationCount> dist;

    GroupForward(ModelPool& pool, const BatchGroup& group, const ActiveSet& active,
                 const LossWeights& weights) {
        const int n = static_cast<int>(group.frames.size());
        std::array<std::vector<char>, kRepresentationCount> needed;
        for (auto& v : needed) v.assign(static_cast<std::size_t>(n), 0);
        enumerate_group(
            group, active, weights,
            [&](int, RepId rep, int pos, int, double) {
                needed[static_cast<std::size_t>(rep_index(rep))][static_cast<std::size_t>(pos)] = 1;
            },
            [&](int, RepId a, int pa, RepId b, int pb) {
                needed[static_cast<std::size_t>(rep_index(a))][static_cast<std::size_t>(pa)] = 1;
                needed[static_cast<std::size_t>(rep_index(b))][static_cast<std::size_t>(pb)] = 1;
            });

        std::vector<ImageF> images(static_cast<std::size_t>(n));
        std::vector<char> have_image(static_cast<std::size_t>(n), 0);
        for (int r = 0; r < kRepresentationCount; ++r) {
            dist[static_cast<std::size_t>(r)].assign(static_cast<std::size_t>(n), nullptr);
            const RepId rep = all_representations()[static_cast<std::size_t>(r)];
            for (int pos = 0; pos < n; ++pos) {
                if (!needed[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos)]) continue;
                const FrameRecord& frame = *group.frames[static_cast<std::size_t>(pos)].frame;
                if (!have_image[static_cast<std::size_t>(pos)]) {
                    images[static_cast<std::size_t>(pos)] = to_float(frame.pixels);
                    have_image[static_cast<std::size_t>(pos)] = 1;
                }
                const std::string frame_name = frame.video_id + "[t=" + std::to_string(frame.t) + "]";
                auto& net = pool.net(rep);
                auto rep_img = make_representation(images[static_cast<std::size_t>(pos)],
                                                   frame.landmarks, rep, frame_name);
                dist[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos)] =
                    net.forward_graph(net.input_tensor(rep_img));
            }
        }
    }

    const TensorPtr& at(RepId rep, int pos) const {
        return dist[static_cast<std::size_t>(rep_index(rep))][static_cast<std::size_t>(pos)];
    }
};

struct GroupSummands {
    std::array<std::vector<TensorPtr>, kTermCount> nodes;
    std::array<std::vector<double>, kTermCount> coeffs;

    GroupSummands(const GroupForward& fwd, const BatchGroup& group, const ActiveSet& active,
                  const LossWeights& weights) {
        enumerate_group(
            group, active, weights,
            [&](int term, RepId rep, int pos, int class0, double weight) {
                nodes[static_cast<std::size_t>(term)].push_back(
                    ops::neg_log_pick(fwd.at(rep, pos), class0, kLogClamp));
                coeffs[static_cast<std::size_t>(term)].push_back(weight);
            },
            [&](int term, RepId a, int pa, RepId b, int pb) {
                nodes[static_cast<std::size_t>(term)].push_back(
                    ops::affine(ops::dot(fwd.at(a, pa), fwd.at(b, pb)), -1.0, 1.0));
                coeffs[static_cast<std::size_t>(term)].push_back(1.0);
            });
    }
};

std::array<double, kTermCount> normalizers(const std::array<long long, kTermCount>& counts,
                                           LossNormalization norm) {
    std::array<double, kTermCount> out{};
    for (int t = 0; t < kTermCount; ++t) {
        const long long c = counts[static_cast<std::size_t>(t)];
        out[static_cast<std::size_t>(t)] =
            norm == LossNormalization::PerBatch ? (c > 0 ? 1.0 / static_cast<double>(c) : 0.0) : 1.0;
    }
    return out;
}

}  // namespace

TensorPtr PoolLossComputer::total_loss_graph(const Batch& batch, LossBreakdown* breakdown) {
    const auto counts = count_terms(batch);
    const auto scale = normalizers(counts, norm_);

    std::array<std::vector<TensorPtr>, kTermCount> nodes;
    std::array<std::vector<double>, kTermCount> coeffs;
    for (const auto& group : batch.groups) {
        GroupForward fwd(*pool_, group, active_, weights_);
        GroupSummands summands(fwd, group, active_, weights_);
        for (int t = 0; t < kTermCount; ++t) {
            auto& dst = nodes[static_cast<std::size_t>(t)];
            auto& src = summands.nodes[static_cast<std::size_t>(t)];
            dst.insert(dst.end(), src.begin(), src.end());
            auto& dc = coeffs[static_cast<std::size_t>(t)];
            auto& sc = summands.coeffs[static_cast<std::size_t>(t)];
            dc.insert(dc.end(), sc.begin(), sc.end());
        }
    }

    std::vector<TensorPtr> term_nodes;
    std::vector<double> term_coeffs;
    const auto lambda = term_coefficients(weights_);
    LossBreakdown result;
    result.counts = counts;
    for (int t = 0; t < kTermCount; ++t) {
        TensorPtr node = nodes[static_cast<std::size_t>(t)].empty()
                             ? Tensor::scalar(0.0)
                             : ops::scale(ops::weighted_sum(nodes[static_cast<std::size_t>(t)],
                                                            coeffs[static_cast<std::size_t>(t)]),
                                          scale[static_cast<std::size_t>(t)]);
        result.terms[static_cast<std::size_t>(t)] = node->item();
        term_nodes.push_back(std::move(node));
        term_coeffs.push_back(lambda[static_cast<std::size_t>(t)]);
    }
    auto total = ops::weighted_sum(term_nodes, term_coeffs);
    result.total = total->item();
    if (breakdown) *breakdown = result;
    return total;
}

LossBreakdown PoolLossComputer::backward_accumulate(const Batch& batch, double grad_scale) {
    const auto counts = count_terms(batch);
    const auto scale = normalizers(counts, norm_);
    const auto lambda = term_coefficients(weights_);

    LossBreakdown result;
    result.counts = counts;
    for (const auto& group : batch.groups) {
        GroupForward fwd(*pool_, group, active_, weights_);
        GroupSummands summands(fwd, group, active_, weights_);
        std::vector<TensorPtr> group_terms;
        std::vector<double> group_coeffs;
        for (int t = 0; t < kTermCount; ++t) {
            if (summands.nodes[static_cast<std::size_t>(t)].empty()) continue;
            auto node = ops::weighted_sum(summands.nodes[static_cast<std::size_t>(t)],
                                          summands.coeffs[static_cast<std::size_t>(t)]);
            result.terms[static_cast<std::size_t>(t)] += node->item() * scale[static_cast<std::size_t>(t)];
            group_coeffs.push_back(lambda[static_cast<std::size_t>(t)] * scale[static_cast<std::size_t>(t)]);
            group_terms.push_back(std::move(node));
        }
        if (group_terms.empty()) continue;
        auto group_total = ops::weighted_sum(group_terms, group_coeffs);
        group_total->backward(grad_scale);
    }
    result.total = 0.0;
    for (int t = 0; t < kTermCount; ++t)
        result.total += lambda[static_cast<std::size_t>(t)] * result.terms[static_cast<std::size_t>(t)];
    return result;
}

LossBreakdown PoolLossComputer::evaluate(const Batch& batch, const DistGetter& dist) const {
    const auto counts = count_terms(batch);
    const auto scale = normalizers(counts, norm_);
    const auto lambda = term_coefficients(weights_);

    std::array<double, kTermCount> raw{};
    for (int g = 0; g < static_cast<int>(batch.groups.size()); ++g) {
        enumerate_group(
            batch.groups[static_cast<std::size_t>(g)], active_, weights_,
            [&](int term, RepId rep, int pos, int class0, double weight) {
                const auto p = dist(rep, g, pos);
                raw[static_cast<std::size_t>(term)] +=
                    weight * -std::log(std::max(p[static_cast<std::size_t>(class0)], kLogClamp));
            },
            [&](int term, RepId a, int pa, RepId b, int pb) {
                raw[static_cast<std::size_t>(term)] += pair_incoherence(dist(a, g, pa), dist(b, g, pb));
            });
    }

    LossBreakdown result;
    result.counts = counts;
    for (int t = 0; t < kTermCount; ++t) {
        result.terms[static_cast<std::size_t>(t)] = raw[static_cast<std::size_t>(t)] * scale[static_cast<std::size_t>(t)];
        result.total += lambda[static_cast<std::size_t>(t)] * result.terms[static_cast<std::size_t>(t)];
    }
    return result;
}

CachingPoolLoss::CachingPoolLoss(ModelPool& pool, const Batch& batch, LossWeights weights,
                                 LossNormalization norm, ActiveSet active)
    : pool_(&pool), batch_(batch), computer_(pool, weights, norm, active) {
    int slots = 0;
    for (const auto& group : batch_.groups) {
        group_offset_.push_back(slots);
        slots += static_cast<int>(group.frames.size());
    }
    needed_.assign(kRepresentationCount, std::vector<char>(static_cast<std::size_t>(slots), 0));
    reps_.assign(kRepresentationCount, std::vector<RepresentationImage>(static_cast<std::size_t>(slots)));
    dists_.assign(kRepresentationCount,
                  std::vector<std::array<double, 7>>(static_cast<std::size_t>(slots)));

    for (int g = 0; g < static_cast<int>(batch_.groups.size()); ++g) {
        const auto& group = batch_.groups[static_cast<std::size_t>(g)];
        auto mark = [&](RepId rep, int pos) {
            needed_[static_cast<std::size_t>(rep_index(rep))]
                   [static_cast<std::size_t>(group_offset_[static_cast<std::size_t>(g)] + pos)] = 1;
        };
        enumerate_group(
            group, computer_.active(), computer_.weights(),
            [&](int, RepId rep, int pos, int, double) { mark(rep, pos); },
            [&](int, RepId a, int pa, RepId b, int pb) {
                mark(a, pa);
                mark(b, pb);
            });
    }

    // Representations are pure functions of the frames; extract them once.
    for (int g = 0; g < static_cast<int>(batch_.groups.size()); ++g) {
        const auto& group = batch_.groups[static_cast<std::size_t>(g)];
        for (int pos = 0; pos < static_cast<int>(group.frames.size()); ++pos) {
            const int slot = group_offset_[static_cast<std::size_t>(g)] + pos;
            const FrameRecord& frame = *group.frames[static_cast<std::size_t>(pos)].frame;
            ImageF img;
            bool have = false;
            for (int r = 0; r < kRepresentationCount; ++r) {
                if (!needed_[static_cast<std::size_t>(r)][static_cast<std::size_t>(slot)]) continue;
                if (!have) {
                    img = to_float(frame.pixels);
                    have = true;
                }
                reps_[static_cast<std::size_t>(r)][static_cast<std::size_t>(slot)] = make_representation(
                    img, frame.landmarks, all_representations()[static_cast<std::size_t>(r)]);
            }
        }
    }
    mark_all_dirty();
}

void CachingPoolLoss::mark_dirty(RepId id) { dirty_[static_cast<std::size_t>(rep_index(id))] = true; }

void CachingPoolLoss::mark_all_dirty() { dirty_.fill(true); }

void CachingPoolLoss::refresh() {
    for (int r = 0; r < kRepresentationCount; ++r) {
        if (!dirty_[static_cast<std::size_t>(r)]) continue;
        const RepId rep = all_representations()[static_cast<std::size_t>(r)];
        for (std::size_t slot = 0; slot < needed_[static_cast<std::size_t>(r)].size(); ++slot) {
            if (!needed_[static_cast<std::size_t>(r)][slot]) continue;
            dists_[static_cast<std::size_t>(r)][slot] =
                pool_->net(rep).forward_nograd(reps_[static_cast<std::size_t>(r)][slot]);
        }
        dirty_[static_cast<std::size_t>(r)] = false;
    }
}

LossBreakdown CachingPoolLoss::breakdown() {
    refresh();
    return computer_.evaluate(batch_, [&](RepId rep, int g, int pos) {
        return dists_[static_cast<std::size_t>(rep_index(rep))]
                     [static_cast<std::size_t>(group_offset_[static_cast<std::size_t>(g)] + pos)];
    });
}

double CachingPoolLoss::value() { return breakdown().total; }

}  // namespace fer
