#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "staglf/analysis.hpp"
#include "staglf/stochastic.hpp"

namespace staglf {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericError("cannot open for writing: " + path.string());
    out << text;
}

inline std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NumericError("cannot open for reading: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

// Field CSV: one row per stored column.
inline void write_field_csv(const fs::path& path, const GridField& f) {
    std::string out = "m,x,value\n";
    for (int i = 0; i < f.grid.N; ++i) {
        out += std::to_string(f.col_of(i));
        out += ',';
        out += fmt_double(f.x_of(i));
        out += ',';
        out += fmt_double(f.vals[static_cast<std::size_t>(i)]);
        out += '\n';
    }
    write_text_file(path, out);
}

// Compact binary dump for resumable runs.
inline void write_field_binary(const fs::path& path, const GridField& f) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericError("cannot open for writing: " + path.string());
    const char magic[4] = {'S', 'G', 'F', '1'};
    out.write(magic, 4);
    const std::int32_t head[4] = {static_cast<std::int32_t>(f.grid.N),
                                  static_cast<std::int32_t>(f.grid.K),
                                  f.parity == Parity::Odd ? 1 : 0,
                                  static_cast<std::int32_t>(f.k)};
    out.write(reinterpret_cast<const char*>(head), sizeof(head));
    out.write(reinterpret_cast<const char*>(f.vals.data()),
              static_cast<std::streamsize>(f.vals.size() * sizeof(double)));
}

inline GridField read_field_binary(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NumericError("cannot open for reading: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "SGF1")
        throw NumericError("bad field dump header: " + path.string());
    std::int32_t head[4];
    in.read(reinterpret_cast<char*>(head), sizeof(head));
    GridField f(StaggeredGrid(head[0], head[1]), head[2] ? Parity::Odd : Parity::Even, head[3]);
    in.read(reinterpret_cast<char*>(f.vals.data()),
            static_cast<std::streamsize>(f.vals.size() * sizeof(double)));
    if (!in) throw NumericError("truncated field dump: " + path.string());
    return f;
}

inline std::string snapshot_name(const std::string& prefix, int k) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%06d.csv", prefix.c_str(), k);
    return buf;
}

// Snapshot CSVs plus a JSON diagnostics sidecar.
inline void write_trajectory(const fs::path& dir, const Trajectory& traj,
                             const std::string& prefix = "snapshot") {
    fs::create_directories(dir);
    for (const auto& f : traj.snapshots) write_field_csv(dir / snapshot_name(prefix, f.k), f);
    json diag = json::array();
    for (const auto& d : traj.diag)
        diag.push_back({{"k", d.k},
                        {"t", d.t},
                        {"mean", d.mean},
                        {"max_abs", d.max_abs},
                        {"cfl_margin", d.cfl_margin},
                        {"E_k", d.E_k}});
    write_text_file(dir / (prefix + "_diagnostics.json"), diag.dump(2) + "\n");
}

inline void write_paths_csv(const fs::path& path, const PathEnsemble& ens, const StaggeredGrid& g) {
    std::string out = "sample,k,t_k,gamma_k,eta_k\n";
    for (const auto& p : ens.samples)
        for (std::size_t k = 0; k < p.cols.size(); ++k) {
            out += std::to_string(p.index);
            out += ',';
            out += std::to_string(k);
            out += ',';
            out += fmt_double(g.t_of(static_cast<long>(k)));
            out += ',';
            out += fmt_double(g.x_of(p.cols[k]));
            out += ',';
            out += fmt_double(p.eta[k]);
            out += '\n';
        }
    write_text_file(path, out);
}

inline void write_sweep_csv(const fs::path& path, const EffectiveCurve& curve) {
    std::string out = "c,h_bar,gap,second_difference\n";
    for (std::size_t i = 0; i < curve.c.size(); ++i) {
        out += fmt_double(curve.c[i]);
        out += ',';
        out += fmt_double(curve.h_bar[i]);
        out += ',';
        out += fmt_double(curve.method_gap[i]);
        out += ',';
        const bool interior = i >= 1 && i + 1 < curve.c.size();
        out += interior ? fmt_double(curve.second_diff[i - 1]) : std::string("nan");
        out += '\n';
    }
    write_text_file(path, out);
}

inline void write_study_csv(const fs::path& path, const StudyResult& res) {
    std::string out = "mesh,dx,error,order\n";
    for (std::size_t i = 0; i < res.fit.dx.size(); ++i) {
        out += std::to_string(res.mesh_n[i]);
        out += ',';
        out += fmt_double(res.fit.dx[i]);
        out += ',';
        out += fmt_double(res.fit.err[i]);
        out += ',';
        // pairwise observed order between consecutive meshes
        if (i == 0 || res.fit.err[i] <= 0.0 || res.fit.err[i - 1] <= 0.0) {
            out += "nan";
        } else {
            const double ord = std::log(res.fit.err[i - 1] / res.fit.err[i]) /
                               std::log(res.fit.dx[i - 1] / res.fit.dx[i]);
            out += fmt_double(ord);
        }
        out += '\n';
    }
    write_text_file(path, out);
}

}  // namespace staglf
