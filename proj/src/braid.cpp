#include "knotlat/braid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "knotlat/errors.hpp"

namespace knotlat {

namespace {

constexpr double kCrossingWidth = 2.0 * M_PI * 1e-6;
constexpr double kTangentialTol = 1e-9;
constexpr double kThetaStep = 0.01;
constexpr int kMaxPerturbations = 5;

// Internal signal: projection angle is degenerate for this spectrum, retry
// with a perturbed angle.
struct TangentialRestart {
    std::string where;
};

double proj_re(const cplx& rot, const cplx& e) { return (rot * e).real(); }
double proj_im(const cplx& rot, const cplx& e) { return (rot * e).imag(); }

// Ranks of the four bands under the projected-real ordering, lowest first.
std::array<int, 4> rank_slots(const cplx& rot, const std::array<cplx, 4>& v) {
    std::array<int, 4> order = {0, 1, 2, 3};
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return proj_re(rot, v[a]) < proj_re(rot, v[b]); });
    std::array<int, 4> rank{};
    for (int slot = 0; slot < 4; ++slot) rank[order[slot]] = slot;
    return rank;
}

std::vector<std::pair<int, int>> sign_change_pairs(const cplx& rot, const std::array<cplx, 4>& lo,
                                                   const std::array<cplx, 4>& hi) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const double glo = proj_re(rot, lo[i]) - proj_re(rot, lo[j]);
            const double ghi = proj_re(rot, hi[i]) - proj_re(rot, hi[j]);
            if (glo * ghi < 0.0) pairs.emplace_back(i, j);
        }
    return pairs;
}

void emit_crossing(const cplx& rot, const std::array<cplx, 4>& lo, double klo, double khi, int i,
                   int j, std::vector<Crossing>& out) {
    const double h = proj_im(rot, lo[i]) - proj_im(rot, lo[j]);
    if (std::abs(h) < kTangentialTol) {
        std::ostringstream os;
        os << "tangential crossing of bands " << i << "," << j << " near k=" << klo;
        throw TangentialRestart{os.str()};
    }
    const auto rank = rank_slots(rot, lo);
    if (std::abs(rank[i] - rank[j]) != 1) {
        std::ostringstream os;
        os << "extract_braid: non-adjacent projected swap of bands " << i << "," << j
           << " (ranks " << rank[i] << "," << rank[j] << ") near k=" << klo
           << "; increase n_k";
        throw GridTooCoarseError(os.str());
    }
    Crossing c;
    c.position = std::min(rank[i], rank[j]) + 1;
    // +1 when the strand with greater projected imaginary part passes from
    // lower to higher projected rank.
    const int up = h > 0.0 ? i : j;
    const int other = up == i ? j : i;
    c.sign = rank[up] < rank[other] ? +1 : -1;
    c.k = 0.5 * (klo + khi);
    out.push_back(c);
}

void resolve(const ModelParams& p, const cplx& rot, const std::array<cplx, 4>& lo, double klo,
             const std::array<cplx, 4>& hi, double khi, std::vector<Crossing>& out) {
    const auto pairs = sign_change_pairs(rot, lo, hi);
    if (pairs.empty()) return;
    if (khi - klo < kCrossingWidth) {
        // Disjoint pairs crossing within one unresolvable interval act on
        // non-overlapping slot pairs, so the generators commute and both can
        // be emitted. This is the generic situation when the spectrum is
        // symmetric under E -> -E: a crossing of one pair pins its mirror
        // pair to the same k for every projection angle, so no angle
        // perturbation can separate them. Pairs sharing a band are a genuine
        // triple point in projection and do need a new angle.
        int used = 0;
        for (const auto& [i, j] : pairs) {
            const int mask = (1 << i) | (1 << j);
            if (used & mask) {
                std::ostringstream os;
                os << "unseparable overlapping crossings near k=" << klo;
                throw TangentialRestart{os.str()};
            }
            used |= mask;
        }
        auto ordered = pairs;
        const auto rank = rank_slots(rot, lo);
        std::sort(ordered.begin(), ordered.end(), [&](const auto& a, const auto& b) {
            return std::min(rank[a.first], rank[a.second]) <
                   std::min(rank[b.first], rank[b.second]);
        });
        for (const auto& [i, j] : ordered) emit_crossing(rot, lo, klo, khi, i, j, out);
        return;
    }
    const double kmid = 0.5 * (klo + khi);
    const auto mid = continue_bands(p, lo, klo, kmid);
    for (const auto& [i, j] : pairs)
        if (std::abs(proj_re(rot, mid[i]) - proj_re(rot, mid[j])) < kTangentialTol) {
            std::ostringstream os;
            os << "bisection probe landed on a crossing near k=" << kmid;
            throw TangentialRestart{os.str()};
        }
    resolve(p, rot, lo, klo, mid, kmid, out);
    resolve(p, rot, mid, kmid, hi, khi, out);
}

BraidWord extract_at_angle(const EnergyStrings& s, double theta) {
    const cplx rot = std::exp(cplx(0.0, -theta));
    const int nk = s.n_k();

    auto vals_at = [&](int m) {
        std::array<cplx, 4> v;
        for (int i = 0; i < 4; ++i) v[i] = s.bands[i][static_cast<std::size_t>(m)];
        return v;
    };

    // A projected difference this small at a sample means a crossing sits on
    // the sample itself (or two strands coincide in projection); the angle is
    // degenerate for this spectrum.
    for (int m = 0; m <= nk; ++m) {
        const auto v = vals_at(m);
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                if (std::abs(proj_re(rot, v[i]) - proj_re(rot, v[j])) < kTangentialTol) {
                    std::ostringstream os;
                    os << "projection-degenerate bands " << i << "," << j << " at sample k="
                       << s.k_grid[static_cast<std::size_t>(m)];
                    throw TangentialRestart{os.str()};
                }
    }

    BraidWord w;
    w.projection_angle = theta;
    {
        const auto rank = rank_slots(rot, vals_at(0));
        for (int i = 0; i < 4; ++i) w.start_order[rank[i]] = i;
    }

    for (int m = 0; m < nk; ++m)
        resolve(s.params, rot, vals_at(m), s.k_grid[static_cast<std::size_t>(m)], vals_at(m + 1),
                s.k_grid[static_cast<std::size_t>(m + 1)], w.generators);

    // Cross-check: replaying the word from the k=0 occupancy must reproduce
    // the directly ranked occupancy at k=2*pi, and the implied value-level
    // gluing must agree with the tracker's endpoint permutation.
    std::array<int, 4> occ = w.start_order;
    for (const Crossing& c : w.generators) std::swap(occ[c.position - 1], occ[c.position]);
    std::array<int, 4> occ_end{};
    {
        const auto rank = rank_slots(rot, vals_at(nk));
        for (int i = 0; i < 4; ++i) occ_end[rank[i]] = i;
    }
    for (int slot = 0; slot < 4; ++slot) {
        if (occ[slot] != occ_end[slot])
            throw GridTooCoarseError(
                "extract_braid: replayed word disagrees with final band ordering; increase n_k");
        if (s.endpoint_permutation[occ_end[slot]] != w.start_order[slot])
            throw GridTooCoarseError(
                "extract_braid: word permutation disagrees with endpoint permutation");
    }
    return w;
}

int component_of(const std::vector<std::vector<int>>& comps, int slot) {
    for (std::size_t c = 0; c < comps.size(); ++c)
        for (int s : comps[c])
            if (s == slot) return static_cast<int>(c);
    throw DimensionError("linking_invariants: slot outside component partition");
}

} // namespace

std::array<int, 4> BraidWord::induced_permutation() const {
    // occ[slot] = strand (start slot) currently at that rank slot
    std::array<int, 4> occ = {0, 1, 2, 3};
    for (const Crossing& c : generators) std::swap(occ[c.position - 1], occ[c.position]);
    std::array<int, 4> perm{};
    for (int slot = 0; slot < 4; ++slot) perm[occ[slot]] = slot;
    return perm;
}

BraidWord extract_braid(const EnergyStrings& strings, double theta) {
    if (strings.n_k() < 1 || strings.bands[0].size() != strings.k_grid.size())
        throw DimensionError("extract_braid: malformed energy strings");
    std::string last;
    for (int attempt = 0; attempt <= kMaxPerturbations; ++attempt) {
        try {
            return extract_at_angle(strings, theta + kThetaStep * attempt);
        } catch (const TangentialRestart& r) {
            last = r.where;
        }
    }
    throw DegenerateProjectionError("extract_braid: no valid projection after " +
                                    std::to_string(kMaxPerturbations) + " perturbations (" + last +
                                    ")");
}

std::vector<std::vector<int>> closure_components(const BraidWord& word) {
    const auto perm = word.induced_permutation();
    std::vector<std::vector<int>> comps;
    std::array<bool, 4> seen = {false, false, false, false};
    for (int s = 0; s < word.strand_count; ++s) {
        if (seen[s]) continue;
        std::vector<int> cycle;
        int cur = s;
        while (!seen[cur]) {
            seen[cur] = true;
            cycle.push_back(cur);
            cur = perm[cur];
        }
        comps.push_back(std::move(cycle));
    }
    return comps;
}

LinkingMatrix linking_invariants(const BraidWord& word) {
    LinkingMatrix m;
    m.components = closure_components(word);
    const int nc = static_cast<int>(m.components.size());
    std::array<int, 4> comp{};
    for (int s = 0; s < word.strand_count; ++s) comp[s] = component_of(m.components, s);

    std::vector<std::vector<int>> sum(nc, std::vector<int>(nc, 0));
    m.writhe.assign(nc, 0);
    std::array<int, 4> occ = {0, 1, 2, 3};
    for (const Crossing& c : word.generators) {
        const int a = comp[occ[c.position - 1]];
        const int b = comp[occ[c.position]];
        if (a == b) {
            m.writhe[a] += c.sign;
        } else {
            sum[a][b] += c.sign;
            sum[b][a] += c.sign;
        }
        std::swap(occ[c.position - 1], occ[c.position]);
    }

    m.lk.assign(nc, std::vector<int>(nc, 0));
    for (int a = 0; a < nc; ++a)
        for (int b = a + 1; b < nc; ++b) {
            if (sum[a][b] % 2 != 0)
                throw GridTooCoarseError(
                    "linking_invariants: odd inter-component crossing sum (missed crossing)");
            m.lk[a][b] = m.lk[b][a] = sum[a][b] / 2;
        }
    return m;
}

std::string InvariantSummary::to_string() const {
    std::ostringstream os;
    os << "(components=" << component_count << ", |lk|=[";
    for (std::size_t i = 0; i < abs_lk_sorted.size(); ++i)
        os << (i ? "," : "") << abs_lk_sorted[i];
    os << "], writhe=" << total_writhe << ")";
    return os.str();
}

KnotClass classify_knot(const LinkingMatrix& inv) {
    const int nc = static_cast<int>(inv.components.size());
    KnotClass k;
    k.summary.component_count = nc;
    for (int a = 0; a < nc; ++a)
        for (int b = a + 1; b < nc; ++b) k.summary.abs_lk_sorted.push_back(std::abs(inv.lk[a][b]));
    std::sort(k.summary.abs_lk_sorted.rbegin(), k.summary.abs_lk_sorted.rend());
    k.summary.total_writhe = std::accumulate(inv.writhe.begin(), inv.writhe.end(), 0);

    const bool lk_all_zero =
        std::all_of(k.summary.abs_lk_sorted.begin(), k.summary.abs_lk_sorted.end(),
                    [](int x) { return x == 0; });
    const bool writhe_all_zero =
        std::all_of(inv.writhe.begin(), inv.writhe.end(), [](int x) { return x == 0; });

    if (lk_all_zero && writhe_all_zero) {
        const bool all_singletons = std::all_of(inv.components.begin(), inv.components.end(),
                                                [](const auto& c) { return c.size() == 1; });
        k.tag = all_singletons ? KnotTag::Unlink : KnotTag::Unknots;
        k.n = nc;
        return k;
    }

    int ones = 0, others = 0;
    for (int x : k.summary.abs_lk_sorted) {
        if (x == 1)
            ++ones;
        else if (x != 0)
            ++others;
    }
    if (ones == 1 && others == 0 && writhe_all_zero) {
        k.tag = KnotTag::HopfLinkPlus;
        k.n = nc;
        return k;
    }

    // chain test: |lk|=1 edges form a path through all components
    if (others == 0 && nc >= 3 && ones == nc - 1) {
        std::vector<int> deg(nc, 0);
        for (int a = 0; a < nc; ++a)
            for (int b = a + 1; b < nc; ++b)
                if (std::abs(inv.lk[a][b]) == 1) {
                    ++deg[a];
                    ++deg[b];
                }
        const int d1 = static_cast<int>(std::count(deg.begin(), deg.end(), 1));
        const int d2 = static_cast<int>(std::count(deg.begin(), deg.end(), 2));
        if (d1 == 2 && d1 + d2 == nc) {
            k.tag = KnotTag::CatenaneChain;
            k.n = nc;
            return k;
        }
    }

    k.tag = KnotTag::Other;
    k.n = nc;
    return k;
}

std::string to_token_stream(const BraidWord& word) {
    if (word.generators.empty()) return "e";
    std::ostringstream os;
    for (std::size_t i = 0; i < word.generators.size(); ++i) {
        if (i) os << ' ';
        os << 's' << word.generators[i].position;
        if (word.generators[i].sign < 0) os << "^-1";
    }
    return os.str();
}

BraidWord free_reduce(const BraidWord& word) {
    BraidWord out = word;
    out.generators.clear();
    for (const Crossing& c : word.generators) {
        if (!out.generators.empty() && out.generators.back().position == c.position &&
            out.generators.back().sign == -c.sign) {
            out.generators.pop_back();
        } else {
            out.generators.push_back(c);
        }
    }
    return out;
}

const char* knot_tag_name(KnotTag tag) {
    switch (tag) {
        case KnotTag::Unlink: return "Unlink";
        case KnotTag::Unknots: return "Unknots";
        case KnotTag::HopfLinkPlus: return "HopfLinkPlus";
        case KnotTag::CatenaneChain: return "CatenaneChain";
        case KnotTag::Other: return "Other";
    }
    return "Other";
}

std::string KnotClass::label() const {
    switch (tag) {
        case KnotTag::Unlink: return "Unlink(" + std::to_string(n) + ")";
        case KnotTag::Unknots: return "Unknots(" + std::to_string(n) + ")";
        case KnotTag::HopfLinkPlus: return "HopfLinkPlus";
        case KnotTag::CatenaneChain: return "CatenaneChain(" + std::to_string(n) + ")";
        case KnotTag::Other: return "Other" + summary.to_string();
    }
    return "Other";
}

} // namespace knotlat
