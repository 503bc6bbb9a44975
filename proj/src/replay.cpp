#include "ppaas/replay.hpp"

#include <stdexcept>

namespace ppaas {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity < 1) throw std::invalid_argument("replay capacity must be positive");
    ring_.reserve(capacity);
}

void ReplayBuffer::push(Transition tr) {
    if (ring_.size() < capacity_) {
        ring_.push_back(std::move(tr));
    } else {
        ring_[next_] = std::move(tr);
        next_ = (next_ + 1) % capacity_;
    }
}

const Transition& ReplayBuffer::at(std::size_t i) const {
    if (i >= ring_.size()) throw std::out_of_range("replay index");
    return ring_[i];
}

std::vector<Transition> cher_relabel(const std::vector<Transition>& episode,
                                     const SpecSchema& schema, const RewardParams& p, Rng& rng) {
    std::vector<Transition> out;
    if (episode.size() < 2) return out;
    out.reserve(episode.size() - 1);
    for (std::size_t t = 0; t + 1 < episode.size(); ++t) {
        const std::size_t t_src = t + 1 + rng.index(episode.size() - 1 - t);
        const Transition& orig = episode[t];
        Transition syn = orig;
        syn.synthetic = true;
        syn.goal = TargetGoal{episode[t_src].achieved.z};
        syn.r = relabel_reward(RewardInputs{orig.z0, orig.Z}, syn.goal, schema, p);
        const bool nom_ok = schema.satisfies(orig.z0, syn.goal.z_hat);
        const bool corners_ok =
            nom_ok && orig.Z.has_value() && schema.satisfies(worst(*orig.Z, schema), syn.goal.z_hat);
        // Without corner data the relabeled goal cannot be certified across
        // corners, so the synthetic transition stays stage 1 and keeps its
        // Z-coherence; the conservative fallback reward already reflects it.
        syn.stage = corners_ok ? 3 : (nom_ok && orig.Z.has_value() ? 2 : 1);
        syn.terminal = corners_ok;
        syn.achieved.z = orig.Z.has_value() ? worst(*orig.Z, schema) : orig.z0;
        syn.achieved.d_nom = nom_ok;
        syn.achieved.d = corners_ok;
        out.push_back(std::move(syn));
    }
    return out;
}

void push_episode(ReplayBuffer& replay, const std::vector<Transition>& episode,
                  const std::vector<Transition>& synthetics) {
    for (std::size_t i = 0; i < episode.size(); ++i) {
        replay.push(episode[i]);
        if (i < synthetics.size()) replay.push(synthetics[i]);
    }
}

std::vector<Transition> sample_batch(const ReplayBuffer& replay, int n, Rng& rng) {
    if (n < 0) throw std::invalid_argument("negative batch size");
    if (n > 0 && replay.size() == 0) throw std::invalid_argument("sampling from empty replay");
    std::vector<Transition> batch;
    batch.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) batch.push_back(replay.at(rng.index(replay.size())));
    return batch;
}

}  // namespace ppaas
