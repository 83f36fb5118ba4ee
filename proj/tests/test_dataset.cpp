#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "mdfcn/dataset.hpp"
#include "mdfcn/mdf.hpp"
#include "mdfcn/netpbm.hpp"
#include "mdfcn/ordinal.hpp"

using namespace mdfcn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "mdfcn_ds_test") {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const char* name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("load_ucr_file") {
    TempDir tmp;
    SUBCASE("basic parse with label remap") {
        write_text(tmp.file("a.tsv"),
                   "2\t0.1\t0.2\t0.3\n"
                   "5\t1.0\t2.0\t3.0\n"
                   "2\t0.0\t0.0\t0.0\n");
        LabelTable labels;
        const auto series = load_ucr_file(tmp.file("a.tsv"), labels);
        REQUIRE(series.size() == 3);
        CHECK(labels == LabelTable{2.0, 5.0});
        CHECK(series[0].label == 1);
        CHECK(series[1].label == 2);
        CHECK(series[0].values == std::vector<double>{0.1, 0.2, 0.3});
    }
    SUBCASE("comma separated") {
        write_text(tmp.file("b.csv"), "1,0.5,0.25\n-1,1.5,2.5\n");
        LabelTable labels;
        const auto series = load_ucr_file(tmp.file("b.csv"), labels);
        CHECK(labels == LabelTable{-1.0, 1.0});  // sorted original order
        CHECK(series[0].label == 2);
        CHECK(series[1].label == 1);
    }
    SUBCASE("empty file") {
        write_text(tmp.file("c.tsv"), "");
        LabelTable labels;
        CHECK_THROWS_AS(load_ucr_file(tmp.file("c.tsv"), labels), std::runtime_error);
    }
    SUBCASE("ragged rows name the line") {
        write_text(tmp.file("d.tsv"), "1\t1\t2\t3\t4\t5\n2\t1\t2\t3\t4\t5\t6\n");
        LabelTable labels;
        try {
            load_ucr_file(tmp.file("d.tsv"), labels);
            FAIL("expected ragged-length error");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("bad token names the line") {
        write_text(tmp.file("e.tsv"), "1\t1\t2\n1\tx\t2\n");
        LabelTable labels;
        try {
            load_ucr_file(tmp.file("e.tsv"), labels);
            FAIL("expected parse error");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("test labels must come from the training table") {
        write_text(tmp.file("f.tsv"), "7\t1\t2\n");
        LabelTable labels = {1.0, 2.0};
        CHECK_THROWS_AS(load_ucr_file(tmp.file("f.tsv"), labels), std::runtime_error);
    }
}

TEST_CASE("ucr write and reload round trip") {
    TempDir tmp;
    const auto series = synthesize_twopatterns(4, 3, 40, 0.1, 77);
    LabelTable labels = {1.0, 2.0, 3.0, 4.0};
    write_ucr_file(tmp.file("rt.tsv"), series, labels);
    LabelTable loaded_labels;
    const auto loaded = load_ucr_file(tmp.file("rt.tsv"), loaded_labels);
    REQUIRE(loaded.size() == series.size());
    CHECK(loaded_labels == labels);
    for (std::size_t i = 0; i < series.size(); ++i) {
        CHECK(loaded[i].label == series[i].label);
        CHECK(loaded[i].values == series[i].values);  // 17 digits, zero loss
    }
}

TEST_CASE("synthesize_twopatterns") {
    SUBCASE("same seed gives identical bytes") {
        TempDir tmp;
        LabelTable labels = {1.0, 2.0, 3.0, 4.0};
        write_ucr_file(tmp.file("s1.tsv"), synthesize_twopatterns(4, 5, 64, 0.05, 9),
                       labels);
        write_ucr_file(tmp.file("s2.tsv"), synthesize_twopatterns(4, 5, 64, 0.05, 9),
                       labels);
        CHECK(fingerprint_file(tmp.file("s1.tsv")) ==
              fingerprint_file(tmp.file("s2.tsv")));
    }
    SUBCASE("class counts are balanced and exact") {
        const auto series = synthesize_twopatterns(4, 7, 48, 0.1, 3);
        REQUIRE(series.size() == 28);
        std::vector<int> counts(4, 0);
        for (const auto& s : series) {
            REQUIRE(s.values.size() == 48);
            counts[s.label - 1]++;
        }
        for (int c : counts) CHECK(c == 7);
    }
    SUBCASE("noiseless events produce 112 and 211 triads at d=1") {
        for (unsigned seed = 1; seed <= 5; ++seed) {
            for (const auto& s : synthesize_twopatterns(4, 2, 64, 0.0, seed)) {
                const auto sets = collect_all_indices(s, 3);
                // Pulses mean every series has an up-step and a down-step.
                CHECK(sets.count("112") == 1);
                CHECK(sets.count("211") == 1);
            }
        }
    }
    SUBCASE("invalid arguments") {
        CHECK_THROWS_AS(synthesize_twopatterns(3, 5, 64, 0.1, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS(synthesize_twopatterns(4, 5, 31, 0.1, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("mdf record round trip") {
    TempDir tmp;
    const auto series = synthesize_twopatterns(2, 3, 40, 0.2, 5);
    const auto images = encode_all(series, 3);
    save_mdf_records(tmp.file("r.mdf"), images);
    const auto loaded = load_mdf_records(tmp.file("r.mdf"));
    REQUIRE(loaded.size() == images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        CHECK(loaded[i].label == images[i].label);
        CHECK(loaded[i].motif_length == images[i].motif_length);
        CHECK(loaded[i].series_length == images[i].series_length);
        REQUIRE(loaded[i].channels.size() == images[i].channels.size());
        for (std::size_t c = 0; c < images[i].channels.size(); ++c) {
            CHECK(loaded[i].channels[c].data == images[i].channels[c].data);
        }
    }
    CHECK_THROWS_AS(load_mdf_records(tmp.file("missing.mdf")), std::runtime_error);
}

TEST_CASE("fingerprint changes iff bytes change") {
    TempDir tmp;
    write_text(tmp.file("x.txt"), "hello world\n");
    write_text(tmp.file("y.txt"), "hello world\n");
    write_text(tmp.file("z.txt"), "hello worle\n");
    CHECK(fingerprint_file(tmp.file("x.txt")) == fingerprint_file(tmp.file("y.txt")));
    CHECK(fingerprint_file(tmp.file("x.txt")) != fingerprint_file(tmp.file("z.txt")));
}

TEST_CASE("pgm and ppm writers") {
    TempDir tmp;
    Grid grid(2, 3);
    grid.data = {0.0, 1.0, 2.0, 3.0, 4.0, 10.0};

    const auto scale = write_pgm16(tmp.file("g.pgm"), grid);
    CHECK(scale.min == 0.0);
    CHECK(scale.max == 10.0);
    std::ifstream in(tmp.file("g.pgm"), std::ios::binary);
    std::string magic, dims;
    std::getline(in, magic);
    CHECK(magic == "P5");
    std::getline(in, dims);
    CHECK(dims == "3 2");
    std::string maxval;
    std::getline(in, maxval);
    CHECK(maxval == "65535");
    std::vector<unsigned char> bytes(12);
    in.read(reinterpret_cast<char*>(bytes.data()), 12);
    REQUIRE(in.gcount() == 12);
    CHECK(bytes[0] == 0);  // min -> 0
    CHECK(bytes[1] == 0);
    CHECK(bytes[10] == 0xff);  // max -> 65535, big endian
    CHECK(bytes[11] == 0xff);

    const auto pscale = write_ppm(tmp.file("g.ppm"), grid);
    CHECK(pscale.max == 10.0);
    std::ifstream pin(tmp.file("g.ppm"), std::ios::binary);
    std::getline(pin, magic);
    CHECK(magic == "P6");
}
