// Point-cloud file I/O: whitespace xyz text, headered CSV, binary PLY.
#pragma once

#include "axiscan/core.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace axiscan {

enum class CloudFormat { XyzText, Csv, BinaryPly };

inline CloudFormat format_from_path(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".csv") return CloudFormat::Csv;
    if (ext == ".ply") return CloudFormat::BinaryPly;
    return CloudFormat::XyzText;  // .xyz, .txt, anything else
}

namespace detail {

inline bool parse_double(std::string_view tok, double& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
        // from_chars in libstdc++ handles nan/inf, but be tolerant of +0.5 etc.
        char* end = nullptr;
        std::string buf(tok);
        out = std::strtod(buf.c_str(), &end);
        return end == buf.c_str() + buf.size() && !buf.empty();
    }
    return true;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) {
        // trim
        auto b = cur.find_first_not_of(" \t\r");
        auto e = cur.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline bool is_binary_label_column(const std::vector<double>& col) {
    for (double v : col)
        if (v != 0.0 && v != 1.0) return false;
    return true;
}

// ---- PLY ----

struct PlyProperty {
    std::string name;
    std::string type;
    std::size_t byte_size = 0;
};

inline std::size_t ply_type_size(const std::string& t) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
        t == "float32")
        return 4;
    if (t == "double" || t == "float64") return 8;
    throw ParseError("ply: unknown property type '" + t + "'");
}

inline double ply_read_value(const char* p, const std::string& type) {
    auto load = [&]<typename T>() {
        T v;
        std::memcpy(&v, p, sizeof v);
        return static_cast<double>(v);
    };
    if (type == "double" || type == "float64") return load.operator()<double>();
    if (type == "float" || type == "float32") return load.operator()<float>();
    if (type == "uchar" || type == "uint8") return load.operator()<std::uint8_t>();
    if (type == "char" || type == "int8") return load.operator()<std::int8_t>();
    if (type == "short" || type == "int16") return load.operator()<std::int16_t>();
    if (type == "ushort" || type == "uint16") return load.operator()<std::uint16_t>();
    if (type == "int" || type == "int32") return load.operator()<std::int32_t>();
    if (type == "uint" || type == "uint32") return load.operator()<std::uint32_t>();
    throw ParseError("ply: unsupported property type '" + type + "'");
}

inline PointCloud load_ply(const std::filesystem::path& path) {
    static_assert(std::endian::native == std::endian::little,
                  "binary ply reader assumes a little-endian host");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
    if (line.rfind("ply", 0) != 0) throw ParseError(path.string() + ": missing ply magic");

    std::size_t vertex_count = 0;
    std::vector<PlyProperty> props;
    bool in_vertex = false;
    bool saw_format = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw == "comment") continue;
        if (kw == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "binary_little_endian")
                throw ParseError(path.string() + ": unsupported ply format '" + fmt + "'");
            saw_format = true;
        } else if (kw == "element") {
            std::string name;
            std::size_t count = 0;
            ls >> name >> count;
            if (name == "vertex") {
                vertex_count = count;
                in_vertex = true;
            } else {
                if (props.empty())
                    throw ParseError(path.string() + ": ply element '" + name +
                                     "' precedes vertex element");
                in_vertex = false;  // trailing elements are ignored
            }
        } else if (kw == "property") {
            if (!in_vertex) continue;
            std::string type, name;
            ls >> type >> name;
            if (type == "list")
                throw ParseError(path.string() + ": list properties unsupported in vertex");
            props.push_back({name, type, ply_type_size(type)});
        } else if (kw == "end_header") {
            break;
        }
    }
    if (!saw_format) throw ParseError(path.string() + ": missing ply format line");
    if (props.empty()) throw ParseError(path.string() + ": no vertex properties");
    if (vertex_count == 0) throw Error(path.string() + ": empty ply (no vertices)");

    std::size_t stride = 0;
    int ix = -1, iy = -1, iz = -1, iscore = -1, ilabel = -1;
    std::vector<std::size_t> offsets(props.size());
    for (std::size_t i = 0; i < props.size(); ++i) {
        offsets[i] = stride;
        stride += props[i].byte_size;
        if (props[i].name == "x") ix = static_cast<int>(i);
        if (props[i].name == "y") iy = static_cast<int>(i);
        if (props[i].name == "z") iz = static_cast<int>(i);
        if (props[i].name == "score") iscore = static_cast<int>(i);
        if (props[i].name == "label") ilabel = static_cast<int>(i);
    }
    if (ix < 0 || iy < 0 || iz < 0)
        throw ParseError(path.string() + ": vertex element lacks x/y/z properties");

    std::vector<char> buf(stride * vertex_count);
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size())
        throw ParseError(path.string() + ": truncated ply payload");

    PointCloud cloud;
    cloud.points.resize(vertex_count);
    if (iscore >= 0) cloud.scores.resize(vertex_count);
    if (ilabel >= 0) cloud.labels.resize(vertex_count);
    for (std::size_t v = 0; v < vertex_count; ++v) {
        const char* rec = buf.data() + v * stride;
        cloud.points[v] = Vec3(ply_read_value(rec + offsets[ix], props[ix].type),
                               ply_read_value(rec + offsets[iy], props[iy].type),
                               ply_read_value(rec + offsets[iz], props[iz].type));
        if (iscore >= 0) cloud.scores[v] = ply_read_value(rec + offsets[iscore], props[iscore].type);
        if (ilabel >= 0)
            cloud.labels[v] =
                ply_read_value(rec + offsets[ilabel], props[ilabel].type) != 0.0 ? 1 : 0;
    }
    return cloud;
}

inline void save_ply(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << cloud.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    if (cloud.has_scores()) out << "property double score\n";
    if (cloud.has_labels()) out << "property uchar label\n";
    out << "end_header\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        double xyz[3] = {cloud.points[i][0], cloud.points[i][1], cloud.points[i][2]};
        out.write(reinterpret_cast<const char*>(xyz), sizeof xyz);
        if (cloud.has_scores())
            out.write(reinterpret_cast<const char*>(&cloud.scores[i]), sizeof(double));
        if (cloud.has_labels())
            out.write(reinterpret_cast<const char*>(&cloud.labels[i]), 1);
    }
    if (!out) throw Error("i/o failure while writing '" + path.string() + "'");
}

// ---- text formats ----

inline PointCloud load_xyz(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");

    PointCloud cloud;
    std::vector<double> col4, col5;
    std::size_t expected_cols = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks.size() < 3 || toks.size() > 5)
            throw ParseError(path.string() + ": line " + std::to_string(lineno) +
                             ": expected 3-5 columns, got " + std::to_string(toks.size()));
        if (expected_cols == 0) expected_cols = toks.size();
        if (toks.size() != expected_cols)
            throw ParseError(path.string() + ": line " + std::to_string(lineno) +
                             ": inconsistent column count");
        double v[5] = {0, 0, 0, 0, 0};
        for (std::size_t c = 0; c < toks.size(); ++c)
            if (!parse_double(toks[c], v[c]))
                throw ParseError(path.string() + ": line " + std::to_string(lineno) +
                                 ": cannot parse '" + std::string(toks[c]) + "'");
        cloud.points.emplace_back(v[0], v[1], v[2]);
        if (toks.size() >= 4) col4.push_back(v[3]);
        if (toks.size() == 5) col5.push_back(v[4]);
    }
    if (cloud.empty()) throw Error(path.string() + ": empty point cloud file");

    if (expected_cols == 5) {
        cloud.scores = std::move(col4);
        cloud.labels.reserve(col5.size());
        for (double v : col5) cloud.labels.push_back(v != 0.0 ? 1 : 0);
    } else if (expected_cols == 4) {
        // A 4th column of pure 0/1 values is a label column, otherwise scores.
        if (is_binary_label_column(col4)) {
            cloud.labels.reserve(col4.size());
            for (double v : col4) cloud.labels.push_back(static_cast<std::uint8_t>(v));
        } else {
            cloud.scores = std::move(col4);
        }
    }
    return cloud;
}

inline void save_xyz(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        out << format_g17(cloud.points[i][0]) << ' ' << format_g17(cloud.points[i][1]) << ' '
            << format_g17(cloud.points[i][2]);
        if (cloud.has_scores()) out << ' ' << format_g17(cloud.scores[i]);
        if (cloud.has_labels()) out << ' ' << int(cloud.labels[i]);
        out << '\n';
    }
    if (!out) throw Error("i/o failure while writing '" + path.string() + "'");
}

inline PointCloud load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw Error(path.string() + ": empty point cloud file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto header = split_csv(line);
    int ix = -1, iy = -1, iz = -1, ilabel = -1, iscore = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        std::string h = header[i];
        std::transform(h.begin(), h.end(), h.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (h == "x") ix = static_cast<int>(i);
        else if (h == "y") iy = static_cast<int>(i);
        else if (h == "z") iz = static_cast<int>(i);
        else if (h == "label") ilabel = static_cast<int>(i);
        else if (h == "score") iscore = static_cast<int>(i);
    }
    if (ix < 0 || iy < 0 || iz < 0)
        throw ParseError(path.string() + ": csv header must name x,y,z columns");

    PointCloud cloud;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != header.size())
            throw ParseError(path.string() + ": line " + std::to_string(lineno) +
                             ": expected " + std::to_string(header.size()) + " cells");
        auto cell = [&](int idx) {
            double v;
            if (!parse_double(cells[static_cast<std::size_t>(idx)], v))
                throw ParseError(path.string() + ": line " + std::to_string(lineno) +
                                 ": cannot parse '" + cells[static_cast<std::size_t>(idx)] + "'");
            return v;
        };
        cloud.points.emplace_back(cell(ix), cell(iy), cell(iz));
        if (ilabel >= 0) cloud.labels.push_back(cell(ilabel) != 0.0 ? 1 : 0);
        if (iscore >= 0) cloud.scores.push_back(cell(iscore));
    }
    if (cloud.empty()) throw Error(path.string() + ": empty point cloud file");
    return cloud;
}

inline void save_csv(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << "x,y,z";
    if (cloud.has_scores()) out << ",score";
    if (cloud.has_labels()) out << ",label";
    out << '\n';
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        out << format_g17(cloud.points[i][0]) << ',' << format_g17(cloud.points[i][1]) << ','
            << format_g17(cloud.points[i][2]);
        if (cloud.has_scores()) out << ',' << format_g17(cloud.scores[i]);
        if (cloud.has_labels()) out << ',' << int(cloud.labels[i]);
        out << '\n';
    }
    if (!out) throw Error("i/o failure while writing '" + path.string() + "'");
}

}  // namespace detail

inline PointCloud load_point_cloud(const std::filesystem::path& path,
                                   std::optional<CloudFormat> format = std::nullopt) {
    if (!std::filesystem::exists(path)) throw Error("no such file: '" + path.string() + "'");
    switch (format.value_or(format_from_path(path))) {
        case CloudFormat::Csv: return detail::load_csv(path);
        case CloudFormat::BinaryPly: return detail::load_ply(path);
        case CloudFormat::XyzText: default: return detail::load_xyz(path);
    }
}

inline void save_point_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                             std::optional<CloudFormat> format = std::nullopt) {
    cloud.validate();
    switch (format.value_or(format_from_path(path))) {
        case CloudFormat::Csv: detail::save_csv(cloud, path); break;
        case CloudFormat::BinaryPly: detail::save_ply(cloud, path); break;
        case CloudFormat::XyzText: default: detail::save_xyz(cloud, path); break;
    }
}

}  // namespace axiscan
