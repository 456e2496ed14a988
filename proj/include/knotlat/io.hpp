#pragma once

// Serialization: CSV data files, JSON manifests and invariant summaries,
// key=value config files, CRC32 checksums, and direct SVG plot emission.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "knotlat/braid.hpp"
#include "knotlat/manybody.hpp"
#include "knotlat/model.hpp"
#include "knotlat/spectral.hpp"
#include "knotlat/topology.hpp"

namespace knotlat {

inline constexpr const char* kToolName = "knotlat";
inline constexpr const char* kToolVersion = "1.0.0";

// 12 significant digits, the CSV numeric format
std::string format_number(double v);

// Flat key=value file, '#' comments and blank lines allowed; parse
// diagnostics carry file and line number.
std::map<std::string, std::string> parse_config_file(const std::string& path);

uint32_t file_crc32(const std::string& path);

struct ManifestFile {
    std::string path;
    std::string schema;
};

// <something>.manifest.json: resolved config echo, tool version, per-file
// CRC32 checksums and sizes, wall-clock timings.
void write_manifest(const std::string& path, const std::map<std::string, std::string>& config,
                    const std::vector<ManifestFile>& files,
                    const std::map<std::string, double>& timings_ms);

void write_text_file(const std::string& path, const std::string& content);

// k, e1_re, e1_im, ..., e4_re, e4_im
void write_spectrum_csv(const std::string& path, const EnergyStrings& s);

// l_a (or l), entropy
void write_entropy_csv(const std::string& path, const EntropyCurve& c);
EntropyCurve read_entropy_csv(const std::string& path);

// branch_p, branch_sign, t2, lambda
void write_boundary_csv(const std::string& path, const std::vector<BoundaryCurve>& curves);

// lambda, t2, boundary, winding, w_raw, knot_tag
void write_phase_csv(const std::string& path, const PhaseDiagramGrid& g);
void write_phase_meta_json(const std::string& path, const PhaseDiagramGrid& g);

// lambda, t2, boundary, log1p_abs_chi
void write_fidelity_csv(const std::string& path, const FidelityGrid& g);

void write_fit_json(const std::string& path, const FitResult& fit, const std::string& mode);

void write_braid_token_file(const std::string& path, const BraidWord& w);
void write_braid_invariants_json(const std::string& path, const BraidWord& w,
                                 const LinkingMatrix& inv, const KnotClass& kc, int n_k);

void write_phase_svg(const std::string& path, const PhaseDiagramGrid& g,
                     const std::vector<BoundaryCurve>& overlays);
void write_fidelity_svg(const std::string& path, const FidelityGrid& g,
                        const std::vector<BoundaryCurve>& overlays);

} // namespace knotlat
