#pragma once

// File formats shared by the command-line tool and the tests: headered
// CSV, 16-bit PGM images, time-tag streams, coincidence-count tables and
// density-matrix dumps. All writers are byte-deterministic.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spdcring/errors.hpp"
#include "spdcring/polarization.hpp"
#include "spdcring/timetag.hpp"

namespace spdcring {

struct OutputHeader {
    std::string version;
    std::string config_hash;
    std::vector<std::string> notes;  // one comment line each

    std::string render() const {
        std::string out = "# spdcring " + version + "\n";
        out += "# config " + config_hash + "\n";
        for (const auto& n : notes) out += "# " + n + "\n";
        return out;
    }
};

// Shortest representation that round-trips through %.12g; stable across
// runs and platforms using IEEE doubles.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

inline void write_csv(const std::string& path, const OutputHeader& header,
                      const std::vector<std::string>& columns,
                      const std::vector<std::vector<std::string>>& rows) {
    std::string body = header.render();
    for (size_t i = 0; i < columns.size(); ++i) {
        if (i) body += ",";
        body += columns[i];
    }
    body += "\n";
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw IoError("csv: row width does not match columns");
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) body += ",";
            body += row[i];
        }
        body += "\n";
    }
    write_text_file(path, body);
}

// 16-bit grayscale PGM (P5, maxval 65535, big-endian samples), intensity
// normalized so the brightest pixel maps to 65535. The pixel pitch rides
// in a comment so downstream metrology keeps physical units.
inline void write_pgm16(const std::string& path,
                        const std::vector<double>& intensity, int n,
                        double pitch_m, const OutputHeader& header) {
    if (static_cast<size_t>(n) * n != intensity.size())
        throw IoError("pgm: intensity size does not match grid");
    double peak = 0.0;
    for (const double v : intensity) peak = std::max(peak, v);
    if (!(peak > 0.0)) throw NumericError("pgm: image has no signal");

    std::string out = "P5\n";
    out += "# spdcring " + header.version + " config " + header.config_hash +
           "\n";
    out += "# pixel_pitch_um " + format_double(pitch_m * 1e6) + "\n";
    for (const auto& note : header.notes) out += "# " + note + "\n";
    out += std::to_string(n) + " " + std::to_string(n) + "\n65535\n";
    out.reserve(out.size() + intensity.size() * 2);
    for (const double v : intensity) {
        const double clipped = std::max(v, 0.0) / peak;
        const auto q = static_cast<uint16_t>(clipped * 65535.0 + 0.5);
        out.push_back(static_cast<char>(q >> 8));
        out.push_back(static_cast<char>(q & 0xff));
    }
    write_text_file(path, out);
}

namespace detail {

inline bool data_line(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    return i < line.size() && line[i] != '#';
}

}  // namespace detail

// One timestamp per line, picoseconds, ascending. Blank lines and '#'
// comments are skipped.
inline TagStream read_tag_stream(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open tag stream: " + path);
    TagStream out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!detail::data_line(line)) continue;
        std::istringstream ss(line);
        int64_t t;
        if (!(ss >> t))
            throw IoError("tag stream " + path + ": bad line " +
                          std::to_string(lineno));
        std::string extra;
        if (ss >> extra)
            throw IoError("tag stream " + path + ": line " +
                          std::to_string(lineno) +
                          " has extra fields; use the two-column reader");
        out.push_back(t);
    }
    require_sorted(out, path.c_str());
    return out;
}

// Two columns per line (channel then timestamp, comma or whitespace
// separated), channels 0 and 1 demultiplexed into two streams.
inline void read_two_column_stream(const std::string& path, TagStream& a,
                                   TagStream& b) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open tag stream: " + path);
    a.clear();
    b.clear();
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!detail::data_line(line)) continue;
        for (auto& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream ss(line);
        int channel;
        int64_t t;
        if (!(ss >> channel >> t))
            throw IoError("tag stream " + path + ": bad line " +
                          std::to_string(lineno));
        if (channel == 0)
            a.push_back(t);
        else if (channel == 1)
            b.push_back(t);
        else
            throw IoError("tag stream " + path + ": channel must be 0 or 1 (line " +
                          std::to_string(lineno) + ")");
    }
    require_sorted(a, "channel 0");
    require_sorted(b, "channel 1");
}

inline void write_tag_stream(const std::string& path, const TagStream& s,
                             const OutputHeader& header) {
    std::string out = header.render();
    for (const int64_t t : s) out += std::to_string(t) + "\n";
    write_text_file(path, out);
}

// Coincidence-count table: setting_a,setting_b,counts,duration_s.
inline void write_count_records(const std::string& path,
                                const std::vector<CoincidenceRecord>& records,
                                const OutputHeader& header) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(records.size());
    for (const auto& r : records)
        rows.push_back({r.setting_a, r.setting_b, format_double(r.counts),
                        format_double(r.duration_s)});
    write_csv(path, header, {"setting_a", "setting_b", "counts", "duration_s"},
              rows);
}

inline std::vector<CoincidenceRecord> read_count_records(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open count table: " + path);
    std::vector<CoincidenceRecord> out;
    std::string line;
    size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!detail::data_line(line)) continue;
        std::vector<std::string> fields;
        std::string cur;
        for (const char ch : line) {
            if (ch == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        fields.push_back(cur);
        if (fields.size() != 4)
            throw IoError("count table " + path + ": line " +
                          std::to_string(lineno) + " needs 4 fields");
        if (!header_seen) {
            if (fields[0] != "setting_a" || fields[1] != "setting_b" ||
                fields[2] != "counts" || fields[3] != "duration_s")
                throw IoError("count table " + path +
                              ": unexpected column header");
            header_seen = true;
            continue;
        }
        CoincidenceRecord r;
        r.setting_a = fields[0];
        r.setting_b = fields[1];
        try {
            r.counts = std::stod(fields[2]);
            r.duration_s = std::stod(fields[3]);
        } catch (const std::exception&) {
            throw IoError("count table " + path + ": bad number on line " +
                          std::to_string(lineno));
        }
        out.push_back(std::move(r));
    }
    if (!header_seen)
        throw IoError("count table " + path + ": missing column header");
    return out;
}

// Density matrix as CSV: four rows of real parts then four rows of
// imaginary parts, basis order HH,HV,VH,VV.
inline void write_density_matrix(const std::string& path,
                                 const Matrix4cd& rho,
                                 const OutputHeader& header) {
    OutputHeader h = header;
    h.notes.push_back(
        "density matrix: 4 rows real part, 4 rows imaginary part, basis "
        "HH,HV,VH,VV");
    std::string body = h.render();
    for (int part = 0; part < 2; ++part)
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                if (j) body += ",";
                const double v = part == 0 ? std::real(rho(i, j))
                                           : std::imag(rho(i, j));
                body += format_double(v);
            }
            body += "\n";
        }
    write_text_file(path, body);
}

inline Matrix4cd read_density_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open density matrix: " + path);
    std::vector<std::array<double, 4>> rows;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!detail::data_line(line)) continue;
        std::array<double, 4> row{};
        std::istringstream ss(line);
        std::string field;
        for (int j = 0; j < 4; ++j) {
            if (!std::getline(ss, field, ','))
                throw IoError("density matrix " + path + ": line " +
                              std::to_string(lineno) + " needs 4 fields");
            try {
                row[j] = std::stod(field);
            } catch (const std::exception&) {
                throw IoError("density matrix " + path +
                              ": bad number on line " +
                              std::to_string(lineno));
            }
        }
        rows.push_back(row);
    }
    if (rows.size() != 8)
        throw IoError("density matrix " + path + ": expected 8 data rows");
    Matrix4cd rho;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            rho(i, j) = std::complex<double>(rows[i][j], rows[i + 4][j]);
    return rho;
}

inline void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir);
}

}  // namespace spdcring
