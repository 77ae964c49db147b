#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plankton/confidence.hpp"
#include "plankton/neural.hpp"

namespace plankton::ensemble {

// Members re-indexed to a shared sorted id order; alignment is by sample id,
// never by row order, so imported files may be arbitrarily ordered.
struct AlignedMembers {
    std::vector<std::string> ids;
    std::vector<std::string> class_names;
    std::vector<std::string> labels;       // empty when no member carries truth
    std::vector<nn::Matrix> member_rows;   // one n x n_c block per member
};

AlignedMembers align_members(const std::vector<ConfidenceMatrix>& members);

// Elementwise mean of member confidences; every member weighs the same.
ConfidenceMatrix average(const std::vector<ConfidenceMatrix>& members);

// Multinomial logistic regression over concatenated member confidences.
struct StackModel {
    std::size_t n_members = 0;
    std::size_t n_classes = 0;
    std::vector<std::string> class_names;
    nn::Matrix weights;  // (n_members * n_classes + 1) x n_classes; last row is bias
    double lambda = 1e-3;
    int iterations = 2000;
    std::string fit_split;
    std::uint64_t fit_ids_hash = 0;
};

// Fit on validation-split confidences by full-batch gradient descent with an
// L2 penalty (applied to every parameter, bias included). Deterministic:
// zero-initialized weights, fixed step from a Lipschitz bound.
StackModel fit_stack(const std::vector<ConfidenceMatrix>& members, double lambda,
                     int iterations, std::uint64_t seed, const std::string& fit_split = "val");

ConfidenceMatrix apply_stack(const StackModel& model,
                             const std::vector<ConfidenceMatrix>& members);

// apply_stack plus a leakage guard: refuses the exact sample set the stack
// was fit on.
ConfidenceMatrix evaluate_stack(const StackModel& model,
                                const std::vector<ConfidenceMatrix>& members);

std::uint64_t hash_ids(const std::vector<std::string>& sorted_ids);

// Rank members by validation macro-F1 (descending, ties by member id) and
// keep the top n. Returns indices into `members`.
std::vector<std::size_t> select_best_n(const std::vector<ConfidenceMatrix>& members,
                                       const std::vector<std::string>& member_ids, std::size_t n);

void save_stack(const StackModel& model, const std::string& path);
StackModel load_stack(const std::string& path);

}  // namespace plankton::ensemble
