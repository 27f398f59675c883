#pragma once

#include "osbench/data.hpp"

#include <span>
#include <string>
#include <vector>

namespace osbench {

// Plurality over all labels, UNKNOWN included. Ties: UNKNOWN if it is among
// the leaders, else the lowest class id.
Label image_vote(std::span<const Label> patch_predictions);

// UNKNOWN when UNKNOWN votes are strictly more than half; otherwise plurality
// among the known votes with the same tie rule.
Label ensemble_vote(std::span<const Label> model_predictions);

// Image-level labels from patch-level predictions, one entry per image in
// sorted image_id order.
struct ImageVotes {
    std::vector<std::string> image_ids;
    std::vector<Label> truths;
    std::vector<Label> predictions;
};
ImageVotes vote_by_image(const Dataset& data, std::span<const Label> patch_predictions);

struct EnsembleCandidate {
    std::string name;
    double standalone_na = 0.0;
    std::vector<Label> predictions; // aligned with the shared truths
};

struct RankedEnsemble {
    std::vector<std::size_t> members; // indices into the candidate list, ascending
    double na = 0.0;
};

struct EnsembleOptions {
    int max_size = 8;
    double na_floor = 0.7;
    int n_known = 0;
    bool force = false;      // lift the 20-model pool cap
    std::size_t jobs = 1;
};

inline constexpr std::size_t kMaxEnsemblePool = 20;

// Every subset of size 1..max_size of the candidates whose standalone NA is
// above na_floor, ranked by ensemble NA (descending); ties keep subset
// enumeration order (by size, then lexicographic).
std::vector<RankedEnsemble> enumerate_ensembles(std::span<const EnsembleCandidate> candidates,
                                                std::span<const Label> truths, const EnsembleOptions& options);

} // namespace osbench
