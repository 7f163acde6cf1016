#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "gradbench/data.hpp"
#include "gradbench/rng.hpp"

using namespace gradbench;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("gradbench-data-" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string write_text(const TempDir& dir, const std::string& name, const std::string& body) {
    const std::string p = dir.file(name);
    std::ofstream out(p);
    out << body;
    return p;
}

std::string write_bytes(const TempDir& dir, const std::string& name,
                        const std::vector<unsigned char>& body) {
    const std::string p = dir.file(name);
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(body.data()),
              static_cast<std::streamsize>(body.size()));
    return p;
}

void push_be32(std::vector<unsigned char>& v, std::uint32_t x) {
    v.push_back(static_cast<unsigned char>(x >> 24));
    v.push_back(static_cast<unsigned char>(x >> 16));
    v.push_back(static_cast<unsigned char>(x >> 8));
    v.push_back(static_cast<unsigned char>(x));
}

// Minimal well-formed pair: one 2x2 image, all pixels 255, label 7.
std::pair<std::vector<unsigned char>, std::vector<unsigned char>> one_image_fixture() {
    std::vector<unsigned char> imgs, lbls;
    push_be32(imgs, 0x803);
    push_be32(imgs, 1);
    push_be32(imgs, 2);
    push_be32(imgs, 2);
    for (int i = 0; i < 4; ++i) imgs.push_back(255);
    push_be32(lbls, 0x801);
    push_be32(lbls, 1);
    lbls.push_back(7);
    return {imgs, lbls};
}

}  // namespace

TEST_CASE("load_csv hand cases") {
    TempDir dir;

    SUBCASE("two rows, target is column 1") {
        const auto p = write_text(dir, "a.csv", "1,2\n3,4\n");
        const Dataset ds = load_csv(p, 1);
        REQUIRE(ds.size() == 2);
        REQUIRE(ds.dim() == 1);
        CHECK(ds.features(0, 0) == 1.0);
        CHECK(ds.features(1, 0) == 3.0);
        CHECK(ds.targets(0) == 2.0);
        CHECK(ds.targets(1) == 4.0);
    }

    SUBCASE("target_column SIZE_MAX means last column") {
        const auto p = write_text(dir, "b.csv", "1,2,9\n3,4,8\n");
        const Dataset ds = load_csv(p, SIZE_MAX);
        CHECK(ds.dim() == 2);
        CHECK(ds.targets(0) == 9.0);
        CHECK(ds.targets(1) == 8.0);
    }

    SUBCASE("header row skipped when requested") {
        const auto p = write_text(dir, "c.csv", "x,y\n1,2\n");
        const Dataset ds = load_csv(p, 1, /*has_header=*/true);
        CHECK(ds.size() == 1);
        CHECK(ds.features(0, 0) == 1.0);
    }
}

TEST_CASE("load_csv structured failures") {
    TempDir dir;

    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_csv(dir.file("nope.csv"), 0), io_error);
    }
    SUBCASE("empty file") {
        const auto p = write_text(dir, "empty.csv", "");
        CHECK_THROWS_AS(load_csv(p, 0), io_error);
    }
    SUBCASE("ragged row names the offending line") {
        const auto p = write_text(dir, "ragged.csv", "1,2\n3,4,5\n");
        try {
            load_csv(p, 0);
            FAIL("expected io_error");
        } catch (const io_error& e) {
            CHECK(std::string(e.what()).find("row 2") != std::string::npos);
        }
    }
    SUBCASE("bad cell names row and column") {
        const auto p = write_text(dir, "bad.csv", "1,2\n3,oops\n");
        try {
            load_csv(p, 0);
            FAIL("expected io_error");
        } catch (const io_error& e) {
            const std::string msg = e.what();
            CHECK(msg.find("row 2") != std::string::npos);
            CHECK(msg.find("column 2") != std::string::npos);
        }
    }
    SUBCASE("target column out of range") {
        const auto p = write_text(dir, "narrow.csv", "1,2\n");
        CHECK_THROWS_AS(load_csv(p, 5), io_error);
    }
}

TEST_CASE("csv round trip preserves every value bit for bit") {
    TempDir dir;
    SeededRng rng(7);
    Dataset ds;
    ds.features.resize(23, 4);
    ds.targets.resize(23);
    for (Eigen::Index i = 0; i < ds.features.size(); ++i)
        ds.features(i) = rng.normal(0.0, 1e3) * std::pow(10.0, double(rng.below(9)) - 4.0);
    for (Eigen::Index i = 0; i < ds.targets.size(); ++i) ds.targets(i) = rng.normal();

    const auto p = dir.file("rt.csv");
    save_csv(ds, p);
    const Dataset back = load_csv(p, SIZE_MAX);
    REQUIRE(back.size() == ds.size());
    REQUIRE(back.dim() == ds.dim());
    CHECK(back.features == ds.features);
    CHECK(back.targets == ds.targets);
}

TEST_CASE("load_idx hand case: one all-white 2x2 image labelled 7") {
    TempDir dir;
    const auto [imgs, lbls] = one_image_fixture();
    const auto ip = write_bytes(dir, "i.idx", imgs);
    const auto lp = write_bytes(dir, "l.idx", lbls);
    const Dataset ds = load_idx(ip, lp);
    REQUIRE(ds.size() == 1);
    REQUIRE(ds.dim() == 4);
    for (int p = 0; p < 4; ++p) CHECK(ds.features(0, p) == 1.0);
    CHECK(ds.targets(0) == 7.0);
}

TEST_CASE("load_idx structured failures") {
    TempDir dir;
    auto [imgs, lbls] = one_image_fixture();

    SUBCASE("bad image magic") {
        imgs[3] = 0x04;
        const auto ip = write_bytes(dir, "i.idx", imgs);
        const auto lp = write_bytes(dir, "l.idx", lbls);
        CHECK_THROWS_AS(load_idx(ip, lp), io_error);
    }
    SUBCASE("bad label magic") {
        lbls[3] = 0x03;
        const auto ip = write_bytes(dir, "i.idx", imgs);
        const auto lp = write_bytes(dir, "l.idx", lbls);
        CHECK_THROWS_AS(load_idx(ip, lp), io_error);
    }
    SUBCASE("count mismatch") {
        lbls[7] = 2;
        const auto ip = write_bytes(dir, "i.idx", imgs);
        const auto lp = write_bytes(dir, "l.idx", lbls);
        CHECK_THROWS_AS(load_idx(ip, lp), io_error);
    }
    SUBCASE("truncated pixel data") {
        imgs.pop_back();
        const auto ip = write_bytes(dir, "i.idx", imgs);
        const auto lp = write_bytes(dir, "l.idx", lbls);
        CHECK_THROWS_AS(load_idx(ip, lp), io_error);
    }
    SUBCASE("implausible shape") {
        imgs[8] = 0xff;  // rows becomes huge
        const auto ip = write_bytes(dir, "i.idx", imgs);
        const auto lp = write_bytes(dir, "l.idx", lbls);
        CHECK_THROWS_AS(load_idx(ip, lp), io_error);
    }
}

TEST_CASE("load_idx corrupted-header fuzz never aborts") {
    TempDir dir;
    SeededRng rng(1234);
    const auto [good_imgs, good_lbls] = one_image_fixture();
    const auto lp = write_bytes(dir, "l.idx", good_lbls);

    int loaded = 0, rejected = 0;
    for (int rep = 0; rep < 100; ++rep) {
        auto imgs = good_imgs;
        const std::size_t flips = 1 + rng.below(4);
        for (std::size_t f = 0; f < flips; ++f) {
            const auto at = static_cast<std::size_t>(rng.below(16));  // header bytes only
            imgs[at] = static_cast<unsigned char>(rng.below(256));
        }
        const auto ip = write_bytes(dir, "fuzz.idx", imgs);
        try {
            (void)load_idx(ip, lp);
            ++loaded;  // mutation can be a no-op or still self-consistent
        } catch (const io_error&) {
            ++rejected;
        }
    }
    CHECK(loaded + rejected == 100);
    CHECK(rejected > 50);  // most corruptions must be detected
}

TEST_CASE("idx round trip preserves quantized pixels and labels") {
    TempDir dir;
    SeededRng rng(8);
    Dataset ds;
    ds.features.resize(17, 28 * 28);
    ds.targets.resize(17);
    for (Eigen::Index i = 0; i < ds.features.size(); ++i)
        ds.features(i) = double(rng.below(256)) / 255.0;  // already on the byte grid
    for (Eigen::Index i = 0; i < ds.targets.size(); ++i)
        ds.targets(i) = static_cast<double>(rng.below(10));

    const auto ip = dir.file("rt.idx"), lp = dir.file("rt-l.idx");
    write_idx(ds, ip, lp);
    const Dataset back = load_idx(ip, lp);
    CHECK(back.features == ds.features);
    CHECK(back.targets == ds.targets);
}

TEST_CASE("split_80_20 sizes") {
    Dataset ds;
    SUBCASE("10 rows -> 8/2") {
        ds.features = Eigen::MatrixXd::Zero(10, 2);
        ds.targets = Eigen::VectorXd::Zero(10);
        const SplitDataset sp = split_80_20(ds, 1);
        CHECK(sp.train.size() == 8);
        CHECK(sp.test.size() == 2);
    }
    SUBCASE("506 rows -> 405/101") {
        ds.features = Eigen::MatrixXd::Zero(506, 3);
        ds.targets = Eigen::VectorXd::Zero(506);
        const SplitDataset sp = split_80_20(ds, 1);
        CHECK(sp.train.size() == 405);
        CHECK(sp.test.size() == 101);
    }
    SUBCASE("too few rows") {
        ds.features = Eigen::MatrixXd::Zero(1, 1);
        ds.targets = Eigen::VectorXd::Zero(1);
        CHECK_THROWS_AS(split_80_20(ds, 1), dimension_error);
    }
}

TEST_CASE("split_80_20 is a deterministic partition") {
    SeededRng meta(77);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 5 + meta.below(80);
        Dataset ds;
        ds.features.resize(static_cast<Eigen::Index>(n), 1);
        ds.targets.resize(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            // feature value encodes the original row index
            ds.features(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
            ds.targets(static_cast<Eigen::Index>(i)) = static_cast<double>(i);
        }
        const std::uint64_t seed = meta.next_u64();
        const SplitDataset a = split_80_20(ds, seed);
        const SplitDataset b = split_80_20(ds, seed);
        CHECK(a.train.features == b.train.features);
        CHECK(a.test.features == b.test.features);

        std::multiset<double> seen;
        for (Eigen::Index i = 0; i < a.train.features.rows(); ++i)
            seen.insert(a.train.features(i, 0));
        for (Eigen::Index i = 0; i < a.test.features.rows(); ++i)
            seen.insert(a.test.features(i, 0));
        REQUIRE(seen.size() == n);  // disjoint and complete
        std::size_t idx = 0;
        for (double v : seen) CHECK(v == static_cast<double>(idx++));
    }
}

TEST_CASE("standardize hand cases") {
    Dataset ds;
    ds.features.resize(2, 2);
    ds.features << 0.0, 5.0,  //
        2.0, 5.0;             // second column is constant
    ds.targets.resize(2);
    ds.targets << 10.0, 20.0;

    SplitDataset sp;
    sp.train = ds;
    sp.test = ds;
    sp.test.features(0, 0) = 4.0;  // outside the train range

    const SplitDataset z = standardize(sp);
    // column 0: mean 1, population sd 1 -> {-1, +1}
    CHECK(z.train.features(0, 0) == doctest::Approx(-1.0));
    CHECK(z.train.features(1, 0) == doctest::Approx(1.0));
    // constant column maps to zeros, scale 1
    CHECK(z.train.features(0, 1) == 0.0);
    CHECK(z.train.features(1, 1) == 0.0);
    // test uses train statistics: (4 - 1) / 1 = 3
    CHECK(z.test.features(0, 0) == doctest::Approx(3.0));
    // targets untouched
    CHECK(z.train.targets == ds.targets);
}

TEST_CASE("batches covers each index exactly once, partial batch kept") {
    SeededRng rng(5);
    const auto bs = batches(5, 2, rng);
    REQUIRE(bs.size() == 3);
    CHECK(bs[0].size() == 2);
    CHECK(bs[1].size() == 2);
    CHECK(bs[2].size() == 1);
    std::set<std::size_t> seen;
    for (const auto& b : bs) seen.insert(b.begin(), b.end());
    CHECK(seen == std::set<std::size_t>{0, 1, 2, 3, 4});

    CHECK_THROWS_AS(batches(5, 0, rng), dimension_error);
}
