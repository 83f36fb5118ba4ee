#include "mdfcn/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "MDF record layout assumes a little-endian host");

namespace mdfcn {

namespace {

std::vector<double> parse_row(const std::string& line, std::size_t line_no) {
    std::string cleaned = line;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::replace(cleaned.begin(), cleaned.end(), '\t', ' ');
    std::istringstream ss(cleaned);
    std::vector<double> row;
    std::string tok;
    while (ss >> tok) {
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            row.push_back(v);
        } catch (const std::exception&) {
            throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                                     ": bad token '" + tok + "'");
        }
    }
    return row;
}

}  // namespace

std::vector<TimeSeries> load_ucr_file(const std::string& path, LabelTable& labels) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::vector<std::pair<double, std::vector<double>>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t expected_len = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        auto row = parse_row(line, line_no);
        if (row.size() < 2) {
            throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                                     ": need a label and at least one value");
        }
        if (expected_len == 0) {
            expected_len = row.size();
        } else if (row.size() != expected_len) {
            throw std::runtime_error("ragged length at line " + std::to_string(line_no) +
                                     ": got " + std::to_string(row.size() - 1) +
                                     " values, expected " +
                                     std::to_string(expected_len - 1));
        }
        rows.emplace_back(row[0], std::vector<double>(row.begin() + 1, row.end()));
    }
    if (rows.empty()) throw std::runtime_error("empty dataset file " + path);

    if (labels.empty()) {
        std::set<double> uniq;
        for (const auto& [lab, vals] : rows) uniq.insert(lab);
        labels.assign(uniq.begin(), uniq.end());
    }
    std::vector<TimeSeries> out;
    out.reserve(rows.size());
    for (const auto& [lab, vals] : rows) {
        const auto it = std::find(labels.begin(), labels.end(), lab);
        if (it == labels.end()) {
            throw std::runtime_error("label " + std::to_string(lab) +
                                     " not present in the training label set");
        }
        TimeSeries ts;
        ts.label = static_cast<int>(std::distance(labels.begin(), it)) + 1;
        ts.values = vals;
        out.push_back(std::move(ts));
    }
    return out;
}

void write_ucr_file(const std::string& path, const std::vector<TimeSeries>& series,
                    const LabelTable& labels) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    char buf[64];
    for (const auto& ts : series) {
        if (ts.label < 1 || static_cast<std::size_t>(ts.label) > labels.size()) {
            throw std::invalid_argument("series label outside the label table");
        }
        std::snprintf(buf, sizeof(buf), "%.17g", labels[ts.label - 1]);
        out << buf;
        for (double v : ts.values) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << '\t' << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("short write to " + path);
}

std::vector<TimeSeries> synthesize_twopatterns(std::size_t classes,
                                               std::size_t per_class, std::size_t T,
                                               double sigma, unsigned seed) {
    if (classes != 2 && classes != 4) {
        throw std::invalid_argument("synthesize_twopatterns: classes must be 2 or 4");
    }
    if (T < 32) throw std::invalid_argument("synthesize_twopatterns: T must be >= 32");
    if (per_class < 1) throw std::invalid_argument("per-class count must be >= 1");
    if (sigma < 0.0) throw std::invalid_argument("noise sigma must be >= 0");

    // Each event is a rectangular pulse away from the baseline and back, so
    // every series carries both up-steps and down-steps. The class is the
    // ordered sequence of pulse directions.
    const std::size_t events = classes == 4 ? 2 : 1;
    const std::size_t segments = 2 * events + 1;  // baselines interleave pulses
    const std::size_t min_width = 5;
    std::mt19937 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);

    std::vector<TimeSeries> out;
    out.reserve(classes * per_class);
    for (std::size_t cls = 1; cls <= classes; ++cls) {
        std::vector<int> dirs(events);
        for (std::size_t e = 0; e < events; ++e) {
            dirs[e] = ((cls - 1) >> (events - 1 - e)) & 1 ? -1 : +1;
        }
        for (std::size_t i = 0; i < per_class; ++i) {
            // Random segment widths with a floor so triads fit on each side
            // of every step.
            const std::size_t spare = T - segments * min_width;
            std::vector<std::size_t> cuts;
            for (std::size_t e = 0; e + 1 < segments; ++e) {
                cuts.push_back(std::uniform_int_distribution<std::size_t>(0, spare)(rng));
            }
            std::sort(cuts.begin(), cuts.end());
            std::vector<std::size_t> widths(segments, min_width);
            std::size_t prev = 0;
            for (std::size_t e = 0; e + 1 < segments; ++e) {
                widths[e] += cuts[e] - prev;
                prev = cuts[e];
            }
            widths[segments - 1] += spare - prev;

            TimeSeries ts;
            ts.label = static_cast<int>(cls);
            ts.values.reserve(T);
            for (std::size_t seg = 0; seg < segments; ++seg) {
                // Odd segments are pulses, even segments are baseline.
                const double level = (seg % 2 == 1) ? dirs[seg / 2] : 0.0;
                for (std::size_t k = 0; k < widths[seg]; ++k) {
                    double v = level;
                    if (sigma > 0.0) v += noise(rng);
                    ts.values.push_back(v);
                }
            }
            out.push_back(std::move(ts));
        }
    }
    return out;
}

namespace {

template <typename T>
void write_raw(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_raw(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

}  // namespace

void save_mdf_records(const std::string& path, const std::vector<MdfImage>& images) {
    if (images.empty()) throw std::invalid_argument("no images to save");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    const MdfImage& first = images[0];
    out.write("MDF1", 4);
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(images.size()));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(first.channels.size()));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(first.d_max()));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(first.width()));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(first.motif_length));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(first.series_length));
    for (const auto& img : images) {
        if (img.channels.size() != first.channels.size() ||
            img.d_max() != first.d_max() || img.width() != first.width()) {
            throw std::invalid_argument("inconsistent image shapes in record file");
        }
        write_raw<std::int32_t>(out, img.label);
        for (const auto& ch : img.channels) {
            out.write(reinterpret_cast<const char*>(ch.data.data()),
                      static_cast<std::streamsize>(ch.data.size() * sizeof(double)));
        }
    }
    if (!out) throw std::runtime_error("short write to " + path);
}

std::vector<MdfImage> load_mdf_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "MDF1", 4) != 0) {
        throw std::runtime_error(path + " is not an MDF record file");
    }
    const auto count = read_raw<std::uint32_t>(in);
    const auto channels = read_raw<std::uint32_t>(in);
    const auto rows = read_raw<std::uint32_t>(in);
    const auto cols = read_raw<std::uint32_t>(in);
    const auto n = read_raw<std::uint32_t>(in);
    const auto T = read_raw<std::uint32_t>(in);
    std::vector<MdfImage> images;
    images.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        MdfImage img;
        img.motif_length = n;
        img.series_length = T;
        img.label = read_raw<std::int32_t>(in);
        img.channels.assign(channels, Grid(rows, cols));
        for (auto& ch : img.channels) {
            in.read(reinterpret_cast<char*>(ch.data.data()),
                    static_cast<std::streamsize>(ch.data.size() * sizeof(double)));
        }
        if (!in) throw std::runtime_error("truncated MDF record file " + path);
        images.push_back(std::move(img));
    }
    return images;
}

std::string fingerprint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::uint64_t h = 14695981039346656037ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return std::string(hex);
}

}  // namespace mdfcn
