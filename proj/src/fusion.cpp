#include "osbench/fusion.hpp"

#include "osbench/error.hpp"
#include "osbench/metrics.hpp"
#include "osbench/parallel.hpp"

#include <algorithm>
#include <map>

namespace osbench {

namespace {

// Leader among the tallied labels with the shared tie rule. The map orders
// known ids ascending with UNKNOWN last.
Label plurality(const std::map<Label, int>& tally)
{
    int top = 0;
    for (const auto& [label, count] : tally)
        top = std::max(top, count);
    const auto unknown = tally.find(Label::unknown());
    if (unknown != tally.end() && unknown->second == top)
        return Label::unknown();
    for (const auto& [label, count] : tally)
        if (count == top)
            return label;
    return Label::unknown();
}

} // namespace

Label image_vote(std::span<const Label> patch_predictions)
{
    if (patch_predictions.empty())
        throw InputError("image_vote needs at least one prediction");
    std::map<Label, int> tally;
    for (auto label : patch_predictions)
        ++tally[label];
    return plurality(tally);
}

Label ensemble_vote(std::span<const Label> model_predictions)
{
    if (model_predictions.empty())
        throw InputError("ensemble_vote needs at least one prediction");
    std::map<Label, int> known;
    std::size_t unknown = 0;
    for (auto label : model_predictions) {
        if (label.is_unknown())
            ++unknown;
        else
            ++known[label];
    }
    if (2 * unknown > model_predictions.size() || known.empty())
        return Label::unknown();
    return plurality(known);
}

ImageVotes vote_by_image(const Dataset& data, std::span<const Label> patch_predictions)
{
    if (patch_predictions.size() != data.size())
        throw InputError("one prediction per sample is required");
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < data.size(); ++i)
        groups[data[i].image_id].push_back(i);

    ImageVotes out;
    for (const auto& [image, rows] : groups) {
        std::vector<Label> votes;
        std::vector<Label> truth_votes;
        for (auto i : rows) {
            votes.push_back(patch_predictions[i]);
            truth_votes.push_back(data[i].label);
        }
        const Label truth = truth_votes.front();
        for (auto t : truth_votes)
            if (t != truth)
                throw InputError("image '" + image + "' has patches with different labels");
        out.image_ids.push_back(image);
        out.truths.push_back(truth);
        out.predictions.push_back(image_vote(votes));
    }
    return out;
}

namespace {

// Subsets of {0..pool-1} with 1..max_size members, by size then lexicographic.
std::vector<std::vector<std::size_t>> subsets(std::size_t pool, std::size_t max_size)
{
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t k = 1; k <= std::min(pool, max_size); ++k) {
        std::vector<std::size_t> idx(k);
        for (std::size_t i = 0; i < k; ++i)
            idx[i] = i;
        while (true) {
            out.push_back(idx);
            std::size_t i = k;
            while (i > 0 && idx[i - 1] == pool - k + (i - 1))
                --i;
            if (i == 0)
                break;
            ++idx[i - 1];
            for (std::size_t j = i; j < k; ++j)
                idx[j] = idx[j - 1] + 1;
        }
    }
    return out;
}

} // namespace

std::vector<RankedEnsemble> enumerate_ensembles(std::span<const EnsembleCandidate> candidates,
                                                std::span<const Label> truths, const EnsembleOptions& options)
{
    if (options.max_size < 1)
        throw InputError("max_size must be at least 1");
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].predictions.size() != truths.size())
            throw InputError("predictions of '" + candidates[i].name + "' are not aligned with the truths");
        if (candidates[i].standalone_na > options.na_floor)
            pool.push_back(i);
    }
    if (pool.empty())
        throw InputError("no model has standalone NA above the floor");
    if (pool.size() > kMaxEnsemblePool && !options.force)
        throw InputError("pool of " + std::to_string(pool.size()) + " models exceeds "
                         + std::to_string(kMaxEnsemblePool) + "; pass force to enumerate anyway");

    const auto combos = subsets(pool.size(), static_cast<std::size_t>(options.max_size));
    std::vector<RankedEnsemble> ranked(combos.size());
    parallel_for(combos.size(), options.jobs, [&](std::size_t c) {
        std::vector<Label> predictions(truths.size());
        std::vector<Label> votes(combos[c].size());
        for (std::size_t s = 0; s < truths.size(); ++s) {
            for (std::size_t m = 0; m < combos[c].size(); ++m)
                votes[m] = candidates[pool[combos[c][m]]].predictions[s];
            predictions[s] = ensemble_vote(votes);
        }
        ranked[c].na = na(confusion(truths, predictions, options.n_known), true);
        for (auto m : combos[c])
            ranked[c].members.push_back(pool[m]);
    });
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedEnsemble& a, const RankedEnsemble& b) { return a.na > b.na; });
    return ranked;
}

} // namespace osbench
