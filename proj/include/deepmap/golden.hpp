#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepmap/graph.hpp"

namespace deepmap {

// Small worked-example graphs with hand-checked expected values. They back
// the `verify` command and double as unit-test fixtures.

// --- Relabeling demo pair ------------------------------------------------------

// Two 6-vertex labeled graphs whose one-round label refinement is fully
// worked out by hand.
Graph wl_demo_graph_a(); // labels (1,1,3,3,4,2)
Graph wl_demo_graph_b(); // labels (1,1,3,2,4,3)

// Refined labels after one iteration (alphabet {1..4} extended by {5..12},
// new labels assigned in sorted signature order).
std::vector<int> wl_demo_refined_a(); // (7,7,9,10,11,8)
std::vector<int> wl_demo_refined_b(); // (6,5,10,8,12,9)

// Dot product of the two graphs' refinement feature maps at h = 1:
// 10 from the original labels plus 3 from the refined ones.
inline constexpr std::int64_t kWlDemoKernelValue = 13;

// --- Alignment demo pair -------------------------------------------------------

// Two unlabeled graphs with distinct-enough centralities to make vertex
// ordering and receptive fields unambiguous (one tie, broken by index).
Graph alignment_demo_graph_a(); // 6 vertices
Graph alignment_demo_graph_b(); // 4 vertices

struct AlignmentExpectation {
    std::vector<double> centrality;              // rounded to 2 decimals
    std::vector<int> sequence;                   // vertex order at w = n
    std::vector<int> field_centers;              // centers with published fields
    std::vector<std::vector<int>> field_members; // members in field order, r = 3
};

AlignmentExpectation alignment_demo_expected_a();
AlignmentExpectation alignment_demo_expected_b();

// --- Executable verification ---------------------------------------------------

struct VerifyCheck {
    std::string name;
    bool passed = false;
    std::string detail; // one-line summary (what was compared, or what differed)
};

// Known check names, in execution order: centrality, fields, wl, grad.
std::vector<std::string> verify_check_names();

// Runs the named check (empty `only` = all). `corrupt` names a check whose
// fixture is deliberately perturbed before checking — a self-test hook that
// must make exactly that check fail. Unknown names throw ArgumentError.
std::vector<VerifyCheck> run_verify_checks(const std::string &only = "",
                                           const std::string &corrupt = "");

} // namespace deepmap
