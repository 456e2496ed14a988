#pragma once

// Braid-word extraction from tracked energy strings and knot classification
// of the braid closure via (components, linking matrix, writhe).

#include <array>
#include <string>
#include <vector>

#include "knotlat/spectral.hpp"

namespace knotlat {

// One braid generator sigma_position^sign located at wave vector k.
struct Crossing {
    int position = 1; // 1..3: acts on projected-rank slots (position, position+1)
    int sign = 1;     // +1 right-handed, -1 left-handed
    double k = 0.0;
};

struct BraidWord {
    std::vector<Crossing> generators; // k strictly increasing
    int strand_count = 4;
    double projection_angle = 0.0; // angle actually used after any perturbation
    // Band label occupying each projected-rank slot at k=0, lowest rank first.
    std::array<int, 4> start_order = {0, 1, 2, 3};

    // Permutation induced by the generator sequence: strand starting at slot s
    // ends at slot induced_permutation()[s].
    std::array<int, 4> induced_permutation() const;
};

struct LinkingMatrix {
    // Closure cycles over start slots 0..3; each cycle begins with its
    // smallest slot, cycles sorted by first element.
    std::vector<std::vector<int>> components;
    std::vector<std::vector<int>> lk; // symmetric, zero diagonal
    std::vector<int> writhe;          // signed self-crossings per component
};

// (component count, |lk| off-diagonal entries sorted descending, total writhe)
struct InvariantSummary {
    int component_count = 0;
    std::vector<int> abs_lk_sorted;
    int total_writhe = 0;

    bool operator==(const InvariantSummary&) const = default;
    std::string to_string() const;
};

enum class KnotTag { Unlink, Unknots, HopfLinkPlus, CatenaneChain, Other };

struct KnotClass {
    KnotTag tag = KnotTag::Other;
    int n = 0; // component count for Unlink/Unknots, ring count for CatenaneChain
    InvariantSummary summary;

    std::string label() const; // e.g. "Unlink(4)", "HopfLinkPlus"
};

// Scans the tracked strings for sign changes of Re(e^{-i theta}(E_i - E_j)),
// localizes each crossing by bisection to dk < 2*pi*1e-6, and records the
// generator sequence. Tangential or sample-coincident crossings trigger a
// restart with theta increased by 0.01, up to 5 perturbations.
BraidWord extract_braid(const EnergyStrings& strings, double theta = 0.0);

std::vector<std::vector<int>> closure_components(const BraidWord& word);

LinkingMatrix linking_invariants(const BraidWord& word);

KnotClass classify_knot(const LinkingMatrix& inv);

// "s1 s2^-1 s3 ..." (empty word -> "e")
std::string to_token_stream(const BraidWord& word);

// Cancels adjacent sigma_i sigma_i^{-1} pairs until stable.
BraidWord free_reduce(const BraidWord& word);

const char* knot_tag_name(KnotTag tag);

} // namespace knotlat
