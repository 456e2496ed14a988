#include "knotlat/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "knotlat/errors.hpp"

namespace knotlat {

namespace {

using nlohmann::json;

std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    return f;
}

void finish_out(std::ofstream& f, const std::string& path) {
    f.flush();
    if (!f) throw IoError("write failed: " + path);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string svg_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

json params_to_json(const ModelParams& p) {
    return json{{"t1", p.t1},         {"t2", p.t2}, {"t3", p.t3}, {"t4", p.t4},
                {"lambda", p.lambda}, {"mu", p.mu}, {"q", p.q}};
}

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// categorical palette for integer winding numbers
const char* winding_color(int w) {
    static const char* kPalette[10] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                       "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};
    return kPalette[((w % 10) + 10) % 10];
}

std::string viridis(double t) {
    static const double stops[5][3] = {{0x44, 0x01, 0x54},
                                       {0x3a, 0x52, 0x8b},
                                       {0x21, 0x91, 0x8c},
                                       {0x5e, 0xc9, 0x62},
                                       {0xfd, 0xe7, 0x25}};
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const int s = std::min(3, static_cast<int>(t));
    const double f = t - s;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(std::lround(stops[s][0] + f * (stops[s + 1][0] - stops[s][0]))),
                  static_cast<int>(std::lround(stops[s][1] + f * (stops[s + 1][1] - stops[s][1]))),
                  static_cast<int>(std::lround(stops[s][2] + f * (stops[s + 1][2] - stops[s][2]))));
    return buf;
}

// Shared heatmap frame: x axis = lambda, y axis = t2.
struct Frame {
    static constexpr double kLeft = 70, kTop = 40, kPlotW = 620, kPlotH = 520;
    static constexpr double kWidth = 860, kHeight = 630;
    double x0, x1, y0, y1; // data ranges including half-cell padding

    Frame(const std::vector<double>& lam, const std::vector<double>& t2) {
        const double dl = lam.size() > 1 ? lam[1] - lam[0] : 1.0;
        const double dt = t2.size() > 1 ? t2[1] - t2[0] : 1.0;
        x0 = lam.front() - dl / 2;
        x1 = lam.back() + dl / 2;
        y0 = t2.front() - dt / 2;
        y1 = t2.back() + dt / 2;
    }
    double px(double lambda) const { return kLeft + (lambda - x0) / (x1 - x0) * kPlotW; }
    double py(double t2) const { return kTop + kPlotH - (t2 - y0) / (y1 - y0) * kPlotH; }
};

void svg_header(std::ostream& os, const std::string& title) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Frame::kWidth << "\" height=\""
       << Frame::kHeight << "\" viewBox=\"0 0 " << Frame::kWidth << " " << Frame::kHeight
       << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << Frame::kLeft << "\" y=\"24\" font-family=\"sans-serif\" "
          "font-size=\"16\">"
       << svg_escape(title) << "</text>\n";
}

void svg_axes(std::ostream& os, const Frame& fr) {
    os << "<rect x=\"" << Frame::kLeft << "\" y=\"" << Frame::kTop << "\" width=\""
       << Frame::kPlotW << "\" height=\"" << Frame::kPlotH
       << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    const double ybase = Frame::kTop + Frame::kPlotH;
    for (double f : {0.0, 0.5, 1.0}) {
        const double xv = fr.x0 + f * (fr.x1 - fr.x0);
        const double yv = fr.y0 + f * (fr.y1 - fr.y0);
        os << "<text x=\"" << fr.px(xv) << "\" y=\"" << ybase + 18
           << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << fmt6(xv)
           << "</text>\n";
        os << "<text x=\"" << Frame::kLeft - 8 << "\" y=\"" << fr.py(yv) + 4
           << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fmt6(yv)
           << "</text>\n";
    }
    os << "<text x=\"" << Frame::kLeft + Frame::kPlotW / 2 << "\" y=\"" << ybase + 40
       << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">lambda</text>\n";
    os << "<text x=\"18\" y=\"" << Frame::kTop + Frame::kPlotH / 2
       << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
          "transform=\"rotate(-90 18 "
       << Frame::kTop + Frame::kPlotH / 2 << ")\">t2</text>\n";
}

void svg_overlays(std::ostream& os, const Frame& fr, const std::vector<BoundaryCurve>& overlays) {
    for (const BoundaryCurve& c : overlays) {
        std::ostringstream pts;
        bool open = false;
        auto flush = [&]() {
            if (open) {
                os << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" "
                      "stroke-dasharray=\"5,3\" points=\""
                   << pts.str() << "\"/>\n";
            }
            pts.str("");
            open = false;
        };
        for (const BoundaryCurvePoint& p : c.points) {
            if (p.lambda < fr.x0 || p.lambda > fr.x1 || p.t2 < fr.y0 || p.t2 > fr.y1) {
                flush();
                continue;
            }
            pts << fr.px(p.lambda) << ',' << fr.py(p.t2) << ' ';
            open = true;
        }
        flush();
    }
}

} // namespace

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected key=value, got \"" + t + "\"");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
        out[key] = value; // last assignment wins
    }
    return out;
}

uint32_t file_crc32(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for checksum: " + path);
    uLong crc = crc32(0L, Z_NULL, 0);
    char buf[65536];
    while (f) {
        f.read(buf, sizeof(buf));
        const std::streamsize n = f.gcount();
        if (n > 0) crc = crc32(crc, reinterpret_cast<const Bytef*>(buf), static_cast<uInt>(n));
    }
    return static_cast<uint32_t>(crc);
}

void write_manifest(const std::string& path, const std::map<std::string, std::string>& config,
                    const std::vector<ManifestFile>& files,
                    const std::map<std::string, double>& timings_ms) {
    json j;
    j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    j["schema_version"] = 1;
    j["timestamp"] = utc_timestamp();
    j["config"] = json::object();
    for (const auto& [k, v] : config) j["config"][k] = v;
    j["files"] = json::array();
    for (const ManifestFile& mf : files) {
        char crc[16];
        std::snprintf(crc, sizeof(crc), "%08x", file_crc32(mf.path));
        j["files"].push_back({{"path", std::filesystem::path(mf.path).filename().string()},
                              {"schema", mf.schema},
                              {"crc32", crc},
                              {"bytes", std::filesystem::file_size(mf.path)}});
    }
    j["timings_ms"] = json::object();
    for (const auto& [k, v] : timings_ms) j["timings_ms"][k] = v;
    auto f = open_out(path);
    f << j.dump(2) << '\n';
    finish_out(f, path);
}

void write_text_file(const std::string& path, const std::string& content) {
    auto f = open_out(path);
    f << content;
    finish_out(f, path);
}

void write_spectrum_csv(const std::string& path, const EnergyStrings& s) {
    auto f = open_out(path);
    f << "k";
    for (int b = 1; b <= 4; ++b) f << ",e" << b << "_re,e" << b << "_im";
    f << '\n';
    for (std::size_t m = 0; m < s.k_grid.size(); ++m) {
        f << format_number(s.k_grid[m]);
        for (int b = 0; b < 4; ++b)
            f << ',' << format_number(s.bands[b][m].real()) << ','
              << format_number(s.bands[b][m].imag());
        f << '\n';
    }
    finish_out(f, path);
}

void write_entropy_csv(const std::string& path, const EntropyCurve& c) {
    auto f = open_out(path);
    f << (c.mode == EntropyMode::vary_cut ? "l_a" : "l") << ",entropy\n";
    for (std::size_t i = 0; i < c.abscissa.size(); ++i)
        f << format_number(c.abscissa[i]) << ',' << format_number(c.entropy[i]) << '\n';
    finish_out(f, path);
}

EntropyCurve read_entropy_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open entropy CSV: " + path);
    std::string line;
    if (!std::getline(f, line)) throw ConfigError(path + ":1: empty entropy CSV");
    EntropyCurve c;
    const std::string header = trim(line);
    if (header == "l_a,entropy")
        c.mode = EntropyMode::vary_cut;
    else if (header == "l,entropy")
        c.mode = EntropyMode::vary_size;
    else
        throw ConfigError(path + ":1: unknown entropy CSV header \"" + header + "\"");
    int lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto comma = t.find(',');
        if (comma == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected two columns");
        try {
            c.abscissa.push_back(std::stod(t.substr(0, comma)));
            c.entropy.push_back(std::stod(t.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    return c;
}

void write_boundary_csv(const std::string& path, const std::vector<BoundaryCurve>& curves) {
    auto f = open_out(path);
    f << "branch_p,branch_sign,t2,lambda\n";
    for (const BoundaryCurve& c : curves)
        for (const BoundaryCurvePoint& p : c.points)
            f << c.p << ',' << c.sign << ',' << format_number(p.t2) << ','
              << format_number(p.lambda) << '\n';
    finish_out(f, path);
}

void write_phase_csv(const std::string& path, const PhaseDiagramGrid& g) {
    auto f = open_out(path);
    f << "lambda,t2,boundary,winding,w_raw,knot_tag\n";
    for (std::size_t i = 0; i < g.lambda_axis.size(); ++i)
        for (std::size_t j = 0; j < g.t2_axis.size(); ++j) {
            const PhaseCell& c = g.cells[i][j];
            f << format_number(g.lambda_axis[i]) << ',' << format_number(g.t2_axis[j]) << ','
              << (c.boundary ? 1 : 0) << ',';
            if (c.boundary)
                f << ",,";
            else
                f << c.winding << ',' << format_number(c.w_raw) << ',';
            f << c.knot_tag << '\n';
        }
    finish_out(f, path);
}

void write_phase_meta_json(const std::string& path, const PhaseDiagramGrid& g) {
    json j;
    j["schema"] = "phase-diagram-meta-v1";
    j["params_base"] = params_to_json(g.params_base);
    j["lambda_axis"] = g.lambda_axis;
    j["t2_axis"] = g.t2_axis;
    j["n_k"] = g.metadata.n_k;
    j["braid_n_k"] = g.metadata.braid_n_k;
    j["gap_threshold"] = g.metadata.gap_threshold;
    j["timestamp"] = g.metadata.timestamp;
    auto f = open_out(path);
    f << j.dump(2) << '\n';
    finish_out(f, path);
}

void write_fidelity_csv(const std::string& path, const FidelityGrid& g) {
    auto f = open_out(path);
    f << "lambda,t2,boundary,log1p_abs_chi\n";
    for (std::size_t i = 0; i < g.lambda_axis.size(); ++i)
        for (std::size_t j = 0; j < g.t2_axis.size(); ++j) {
            const FidelityScanPoint& p = g.cells[i][j];
            f << format_number(g.lambda_axis[i]) << ',' << format_number(g.t2_axis[j]) << ','
              << (p.boundary ? 1 : 0) << ',' << format_number(p.log1p_abs_chi) << '\n';
        }
    finish_out(f, path);
}

void write_fit_json(const std::string& path, const FitResult& fit, const std::string& mode) {
    nlohmann::json j;
    j["mode"] = mode;
    j["c"] = fit.c;
    j["c_stderr"] = fit.c_stderr;
    j["intercept"] = fit.intercept;
    j["rms_residual"] = fit.rms_residual;
    j["window"] = {fit.window.first, fit.window.second};
    j["poor_fit"] = fit.poor_fit;
    auto f = open_out(path);
    f << j.dump(2) << '\n';
    finish_out(f, path);
}

void write_braid_token_file(const std::string& path, const BraidWord& w) {
    write_text_file(path, to_token_stream(w) + "\n");
}

void write_braid_invariants_json(const std::string& path, const BraidWord& w,
                                 const LinkingMatrix& inv, const KnotClass& kc, int n_k) {
    json j;
    j["schema"] = "braid-invariants-v1";
    j["word"] = to_token_stream(w);
    j["strand_count"] = w.strand_count;
    j["projection_angle"] = w.projection_angle;
    j["n_k"] = n_k;
    j["crossings"] = json::array();
    for (const Crossing& c : w.generators)
        j["crossings"].push_back({{"position", c.position}, {"sign", c.sign}, {"k", c.k}});
    j["components"] = inv.components;
    j["lk"] = inv.lk;
    j["writhe"] = inv.writhe;
    j["knot"] = kc.label();
    j["summary"] = {{"component_count", kc.summary.component_count},
                    {"abs_lk_sorted", kc.summary.abs_lk_sorted},
                    {"total_writhe", kc.summary.total_writhe}};
    auto f = open_out(path);
    f << j.dump(2) << '\n';
    finish_out(f, path);
}

void write_phase_svg(const std::string& path, const PhaseDiagramGrid& g,
                     const std::vector<BoundaryCurve>& overlays) {
    const Frame fr(g.lambda_axis, g.t2_axis);
    std::ostringstream os;
    svg_header(os, "winding number over (lambda, t2)");
    const double cw = Frame::kPlotW / g.lambda_axis.size();
    const double ch = Frame::kPlotH / g.t2_axis.size();
    std::vector<int> seen;
    for (std::size_t i = 0; i < g.lambda_axis.size(); ++i)
        for (std::size_t j = 0; j < g.t2_axis.size(); ++j) {
            const PhaseCell& c = g.cells[i][j];
            const char* color = c.boundary ? "#444444" : winding_color(c.winding);
            if (!c.boundary && std::find(seen.begin(), seen.end(), c.winding) == seen.end())
                seen.push_back(c.winding);
            os << "<rect x=\"" << Frame::kLeft + i * cw << "\" y=\""
               << Frame::kTop + Frame::kPlotH - (j + 1) * ch << "\" width=\"" << cw + 0.5
               << "\" height=\"" << ch + 0.5 << "\" fill=\"" << color << "\"/>\n";
        }
    svg_overlays(os, fr, overlays);
    svg_axes(os, fr);
    std::sort(seen.begin(), seen.end());
    double ly = Frame::kTop + 10;
    const double lx = Frame::kLeft + Frame::kPlotW + 16;
    for (int w : seen) {
        os << "<rect x=\"" << lx << "\" y=\"" << ly - 10
           << "\" width=\"14\" height=\"14\" fill=\"" << winding_color(w) << "\"/>\n"
           << "<text x=\"" << lx + 20 << "\" y=\"" << ly + 2
           << "\" font-family=\"sans-serif\" font-size=\"12\">w = " << w << "</text>\n";
        ly += 20;
    }
    os << "<rect x=\"" << lx << "\" y=\"" << ly - 10
       << "\" width=\"14\" height=\"14\" fill=\"#444444\"/>\n"
       << "<text x=\"" << lx + 20 << "\" y=\"" << ly + 2
       << "\" font-family=\"sans-serif\" font-size=\"12\">boundary</text>\n";
    os << "</svg>\n";
    write_text_file(path, os.str());
}

void write_fidelity_svg(const std::string& path, const FidelityGrid& g,
                        const std::vector<BoundaryCurve>& overlays) {
    const Frame fr(g.lambda_axis, g.t2_axis);
    std::ostringstream os;
    svg_header(os, "log(1+|chi|) over (lambda, t2), clip 2e4");
    const double cw = Frame::kPlotW / g.lambda_axis.size();
    const double ch = Frame::kPlotH / g.t2_axis.size();
    const double vmax = std::log1p(g.clip);
    for (std::size_t i = 0; i < g.lambda_axis.size(); ++i)
        for (std::size_t j = 0; j < g.t2_axis.size(); ++j) {
            const FidelityScanPoint& p = g.cells[i][j];
            os << "<rect x=\"" << Frame::kLeft + i * cw << "\" y=\""
               << Frame::kTop + Frame::kPlotH - (j + 1) * ch << "\" width=\"" << cw + 0.5
               << "\" height=\"" << ch + 0.5 << "\" fill=\"" << viridis(p.log1p_abs_chi / vmax)
               << "\"/>\n";
        }
    svg_overlays(os, fr, overlays);
    svg_axes(os, fr);
    const double lx = Frame::kLeft + Frame::kPlotW + 16;
    for (int s = 0; s <= 10; ++s) {
        os << "<rect x=\"" << lx << "\" y=\"" << Frame::kTop + (10 - s) * 16
           << "\" width=\"14\" height=\"16\" fill=\"" << viridis(s / 10.0) << "\"/>\n";
    }
    os << "<text x=\"" << lx + 20 << "\" y=\"" << Frame::kTop + 11 * 16
       << "\" font-family=\"sans-serif\" font-size=\"11\">0</text>\n"
       << "<text x=\"" << lx + 20 << "\" y=\"" << Frame::kTop + 10
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << fmt6(vmax) << "</text>\n";
    os << "</svg>\n";
    write_text_file(path, os.str());
}

} // namespace knotlat
