#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "test_util.hpp"
#include "thermogen/dataio.hpp"
#include "thermogen/image.hpp"

using namespace thermogen;
using namespace tgtest;

namespace {

FrameStream make_stream(Modality m, double rate, std::vector<int64_t> ts) {
    FrameStream s;
    s.modality = m;
    s.nominal_rate_hz = rate;
    for (int64_t t : ts)
        s.frames.push_back({t, modality_name(m) + "/" + std::to_string(t) + ".png"});
    return s;
}

std::vector<FrameStream> five_streams(const std::vector<int64_t>& thermal_ts,
                                      const std::vector<int64_t>& rgb_ts) {
    std::vector<FrameStream> streams;
    streams.push_back(make_stream(Modality::Thermal, 6, thermal_ts));
    for (Modality v : kViewOrder) streams.push_back(make_stream(v, 30, rgb_ts));
    return streams;
}

// Exhaustive O(n*m) reference pairing.
std::vector<SyncedSample> brute_force_sync(const std::vector<FrameStream>& streams,
                                           int64_t tolerance_ms) {
    const FrameStream* thermal = nullptr;
    std::array<const FrameStream*, 4> views = {};
    for (const auto& s : streams) {
        if (s.modality == Modality::Thermal) thermal = &s;
        for (size_t i = 0; i < kViewOrder.size(); ++i)
            if (s.modality == kViewOrder[i]) views[i] = &s;
    }
    std::vector<SyncedSample> out;
    for (const FrameRef& tf : thermal->frames) {
        SyncedSample sample;
        sample.thermal = tf;
        bool ok = true;
        for (size_t i = 0; i < 4; ++i) {
            int64_t best_skew = INT64_MAX;
            const FrameRef* best = nullptr;
            for (const FrameRef& vf : views[i]->frames) {
                int64_t skew = std::llabs(vf.ts_ms - tf.ts_ms);
                if (skew < best_skew) {  // strict <: earlier frame wins ties
                    best_skew = skew;
                    best = &vf;
                }
            }
            if (!best || best_skew > tolerance_ms) {
                ok = false;
                break;
            }
            sample.views[i] = *best;
        }
        if (ok) out.push_back(sample);
    }
    return out;
}

bool samples_equal(const std::vector<SyncedSample>& a, const std::vector<SyncedSample>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].thermal.ts_ms != b[i].thermal.ts_ms) return false;
        for (size_t v = 0; v < 4; ++v)
            if (a[i].views[v].ts_ms != b[i].views[v].ts_ms ||
                a[i].views[v].path != b[i].views[v].path)
                return false;
    }
    return true;
}

std::set<std::string> sample_keys(const DatasetManifest& m) {
    std::set<std::string> keys;
    for (const auto& s : m.samples)
        keys.insert(std::to_string(s.subject_id) + ":" + s.thermal.path);
    return keys;
}

}  // namespace

TEST_CASE("thermal calibration endpoints and midpoint") {
    ThermalCalibration cal;
    CHECK(cal.thermal_to_code(-20.0f) == 0.0f);
    CHECK(cal.thermal_to_code(300.0f) == 255.0f);
    CHECK(cal.thermal_to_code(140.0f) == doctest::Approx(127.5f));
    CHECK(cal.code_to_thermal(0.0f) == doctest::Approx(-20.0f));
    CHECK(cal.code_to_thermal(255.0f) == doctest::Approx(300.0f));
}

TEST_CASE("thermal calibration round-trip stays within the quantization bound") {
    ThermalCalibration cal;
    Rng rng(5);
    const float bound = 320.0f / 255.0f / 2.0f;
    for (int i = 0; i < 1000; ++i) {
        float t = rng.uniform(-20.0f, 300.0f);
        float code = std::roundf(cal.thermal_to_code(t));
        float back = cal.code_to_thermal(code);
        CHECK(std::fabs(back - t) <= bound + 1e-4f);
    }
    CHECK(cal.clamp_count == 0);
    cal.thermal_to_code(400.0f);
    cal.thermal_to_code(-50.0f);
    CHECK(cal.clamp_count == 2);
    CHECK(cal.thermal_to_code(1000.0f) == 255.0f);
}

TEST_CASE("frame stream validation rejects non-increasing timestamps") {
    FrameStream s = make_stream(Modality::Front, 30, {0, 10, 10});
    CHECK_THROWS_AS(s.validate(), ContractError);
}

TEST_CASE("synchronize pairs identical timestamp sets with zero skew") {
    std::vector<int64_t> ts = {0, 100, 200, 300};
    auto samples = synchronize(five_streams(ts, ts), 50);
    REQUIRE(samples.size() == 4);
    for (size_t i = 0; i < samples.size(); ++i)
        for (const auto& v : samples[i].views) CHECK(v.ts_ms == samples[i].thermal.ts_ms);
}

TEST_CASE("synchronize picks the nearest frame; 90 beats 120 for thermal at 100") {
    auto samples = synchronize(five_streams({100}, {90, 120}), 20);
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].views[0].ts_ms == 90);
}

TEST_CASE("equidistant candidates resolve to the earlier frame") {
    auto samples = synchronize(five_streams({100}, {90, 110}), 20);
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].views[0].ts_ms == 90);
}

TEST_CASE("synchronize drops thermal frames whose best pairing exceeds tolerance") {
    auto samples = synchronize(five_streams({0, 500}, {0, 10, 20}), 25);
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].thermal.ts_ms == 0);
}

TEST_CASE("synchronize equals the exhaustive oracle on 100 random jittered pairs") {
    Rng rng(77);
    for (int c = 0; c < 100; ++c) {
        // Thermal about 9 Hz, RGB about 30 Hz, both with jitter.
        std::vector<int64_t> thermal_ts, rgb_ts;
        int64_t t = static_cast<int64_t>(rng.uniform_int(40));
        int nt = 3 + static_cast<int>(rng.uniform_int(15));
        for (int i = 0; i < nt; ++i) {
            thermal_ts.push_back(t);
            t += 111 + static_cast<int64_t>(rng.uniform_int(30)) - 15;
        }
        int64_t r = static_cast<int64_t>(rng.uniform_int(30));
        int nr = 10 + static_cast<int>(rng.uniform_int(50));
        for (int i = 0; i < nr; ++i) {
            rgb_ts.push_back(r);
            r += 33 + static_cast<int64_t>(rng.uniform_int(10)) - 5;
        }
        int64_t tolerance = 10 + static_cast<int64_t>(rng.uniform_int(80));
        auto streams = five_streams(thermal_ts, rgb_ts);
        CHECK(samples_equal(synchronize(streams, tolerance),
                            brute_force_sync(streams, tolerance)));
    }
}

TEST_CASE("collage shapes and quadrant placement of constant views") {
    std::array<Tensor, 4> views;
    for (int i = 0; i < 4; ++i)
        views[static_cast<size_t>(i)] = Tensor::full({1, 3, 4, 4}, static_cast<float>(i + 1));

    Tensor tess = compose_collage(views, InputStyle::FourViewTessellated);
    CHECK(tess.shape() == Shape{1, 3, 8, 8});
    // Row-major 2x2 order: front, overhead / profile, tablet.
    auto at = [&](int64_t c, int64_t y, int64_t x) {
        return tess.values()[static_cast<size_t>((c * 8 + y) * 8 + x)];
    };
    for (int64_t c = 0; c < 3; ++c) {
        CHECK(at(c, 1, 1) == 1.0f);
        CHECK(at(c, 1, 6) == 2.0f);
        CHECK(at(c, 6, 1) == 3.0f);
        CHECK(at(c, 6, 6) == 4.0f);
    }

    Tensor stacked = compose_collage(views, InputStyle::FourViewStacked);
    CHECK(stacked.shape() == Shape{1, 3, 16, 4});
    for (int band = 0; band < 4; ++band) {
        float v = stacked.values()[static_cast<size_t>((0 * 16 + band * 4 + 2) * 4 + 2)];
        CHECK(v == static_cast<float>(band + 1));
    }

    Tensor front = compose_collage(views, InputStyle::FrontView);
    CHECK(front.shape() == Shape{1, 3, 4, 4});
    CHECK(front.values() == views[0].values());
}

TEST_CASE("compose/decompose round-trips pixel-exact for four-view styles") {
    Rng rng(9);
    std::array<Tensor, 4> views;
    for (auto& v : views) v = random_tensor({1, 3, 6, 6}, rng, false, 0.0f, 1.0f);
    for (InputStyle style : {InputStyle::FourViewTessellated, InputStyle::FourViewStacked}) {
        auto back = decompose_collage(compose_collage(views, style), style);
        for (size_t i = 0; i < 4; ++i) CHECK(back[i].values() == views[i].values());
    }
    CHECK_THROWS_AS(decompose_collage(views[0], InputStyle::FrontView), ContractError);
}

TEST_CASE("collage with mismatched view extents is rejected") {
    std::array<Tensor, 4> views;
    for (auto& v : views) v = Tensor::zeros({1, 3, 4, 4});
    views[2] = Tensor::zeros({1, 3, 5, 5});
    CHECK_THROWS_AS(compose_collage(views, InputStyle::FourViewStacked), ContractError);
}

TEST_CASE("split of 500 samples at 80/10/10 gives 400/50/50") {
    DatasetManifest m;
    m.root = "r";
    for (int i = 0; i < 500; ++i) {
        SyncedSample s;
        s.subject_id = 0;
        s.thermal = {i * 100, "thermal/" + std::to_string(i) + ".png"};
        m.samples.push_back(s);
    }
    SplitResult r = split(m, {0.8, 0.1, 0.1}, 42);
    CHECK(r.train.samples.size() == 400);
    CHECK(r.val.samples.size() == 50);
    CHECK(r.test.samples.size() == 50);
    CHECK(r.train.split == "train");
    CHECK(r.test.seed == 42);

    SplitResult again = split(m, {0.8, 0.1, 0.1}, 42);
    CHECK(sample_keys(again.train) == sample_keys(r.train));
    CHECK(sample_keys(again.test) == sample_keys(r.test));
    SplitResult other = split(m, {0.8, 0.1, 0.1}, 43);
    CHECK(other.train.samples.size() == 400);
    CHECK(sample_keys(other.train) != sample_keys(r.train));

    CHECK_THROWS_AS(split(m, {0.8, 0.1, 0.2}, 1), ConfigError);
}

TEST_CASE("split partitions are disjoint and cover the parent on random manifests") {
    Rng rng(55);
    for (int c = 0; c < 100; ++c) {
        DatasetManifest m;
        m.root = "r";
        int n = 3 + static_cast<int>(rng.uniform_int(120));
        for (int i = 0; i < n; ++i) {
            SyncedSample s;
            s.subject_id = static_cast<int64_t>(rng.uniform_int(3));
            s.thermal = {i, "t/" + std::to_string(c) + "_" + std::to_string(i) + ".png"};
            m.samples.push_back(s);
        }
        SplitResult r = split(m, {0.8, 0.1, 0.1}, rng.next_u64());
        auto a = sample_keys(r.train), b = sample_keys(r.val), d = sample_keys(r.test);
        CHECK(a.size() + b.size() + d.size() == static_cast<size_t>(n));
        std::set<std::string> all = a;
        all.insert(b.begin(), b.end());
        all.insert(d.begin(), d.end());
        CHECK(all == sample_keys(m));  // cover, and sizes imply disjoint
    }
}

TEST_CASE("subsample draws unique entries and rejects oversized requests") {
    DatasetManifest pool;
    pool.root = "r";
    for (int subject = 0; subject < 17; ++subject)
        for (int i = 0; i < 500; ++i) {
            SyncedSample s;
            s.subject_id = subject;
            s.thermal = {i, std::to_string(subject) + "/" + std::to_string(i) + ".png"};
            pool.samples.push_back(s);
        }
    REQUIRE(pool.samples.size() == 8500);

    DatasetManifest picked = subsample(pool, 5000, 7);
    CHECK(picked.samples.size() == 5000);
    CHECK(sample_keys(picked).size() == 5000);  // unique

    // Per-subject counts should concentrate near 5000/17 ~ 294 under a
    // uniform draw; chi-squared sanity with a generous fixed-seed bound.
    std::map<int64_t, int64_t> counts;
    for (const auto& s : picked.samples) counts[s.subject_id]++;
    double chi2 = 0.0;
    const double expected = 5000.0 / 17.0;
    for (auto& [id, cnt] : counts)
        chi2 += (cnt - expected) * (cnt - expected) / expected;
    CHECK(counts.size() == 17);
    CHECK(chi2 < 40.0);  // 16 dof, p ~ 8e-4 cut

    DatasetManifest identity = subsample(pool, pool.samples.size(), 7);
    CHECK(sample_keys(identity) == sample_keys(pool));

    CHECK_THROWS_AS(subsample(pool, 8501, 7), ContractError);
}

TEST_CASE("manifest writes and reads back, with root from the file location") {
    TempDir dir("manifest");
    DatasetManifest m;
    m.root = dir.path();
    m.split = "val";
    m.seed = 1234;
    for (int i = 0; i < 5; ++i) {
        SyncedSample s;
        s.subject_id = i % 2;
        s.thermal = {i * 167, "subject_00/thermal/" + std::to_string(i) + ".png"};
        for (size_t v = 0; v < 4; ++v)
            s.views[v] = {i * 167 + static_cast<int64_t>(v),
                          "subject_00/" + modality_name(kViewOrder[v]) + "/" +
                              std::to_string(i) + ".png"};
        m.samples.push_back(s);
    }
    std::string path = dir.path() + "/index.tsv";
    write_manifest(m, path);
    DatasetManifest back = read_manifest(path);
    CHECK(back.root == dir.path());
    CHECK(back.split == "val");
    CHECK(back.seed == 1234);
    REQUIRE(back.samples.size() == 5);
    for (size_t i = 0; i < 5; ++i) {
        CHECK(back.samples[i].subject_id == m.samples[i].subject_id);
        CHECK(back.samples[i].thermal.path == m.samples[i].thermal.path);
        CHECK(back.samples[i].thermal.ts_ms == m.samples[i].thermal.ts_ms);
        for (size_t v = 0; v < 4; ++v) {
            CHECK(back.samples[i].views[v].path == m.samples[i].views[v].path);
            CHECK(back.samples[i].views[v].ts_ms == m.samples[i].views[v].ts_ms);
        }
    }
    CHECK_THROWS_AS(read_manifest(dir.path() + "/nope.tsv"), IoError);
}

TEST_CASE("merge, filter_subject and subject_ids behave as set operations") {
    DatasetManifest a, b;
    a.root = b.root = "r";
    SyncedSample s1;
    s1.subject_id = 3;
    s1.thermal = {0, "x.png"};
    SyncedSample s2;
    s2.subject_id = 5;
    s2.thermal = {1, "y.png"};
    a.samples = {s1};
    b.samples = {s2, s1};
    DatasetManifest m = merge({a, b});
    CHECK(m.samples.size() == 3);
    CHECK(subject_ids(m) == std::vector<int64_t>{3, 5});
    CHECK(filter_subject(m, 3).samples.size() == 2);
    CHECK(filter_subject(m, 5).samples.size() == 1);
    DatasetManifest other = b;
    other.root = "elsewhere";
    CHECK_THROWS_AS(merge({a, other}), ContractError);
}

TEST_CASE("png round-trips gray and rgb rasters byte-deterministically") {
    TempDir dir("png");
    Rng rng(6);
    for (int channels : {1, 3}) {
        ImageU8 img;
        img.width = 13;
        img.height = 9;
        img.channels = channels;
        img.pixels.resize(static_cast<size_t>(13 * 9 * channels));
        for (auto& p : img.pixels) p = static_cast<uint8_t>(rng.uniform_int(256));
        std::string p1 = dir.path() + "/a" + std::to_string(channels) + ".png";
        std::string p2 = dir.path() + "/b" + std::to_string(channels) + ".png";
        write_png(p1, img);
        write_png(p2, img);
        ImageU8 back = read_png(p1);
        CHECK(back.width == img.width);
        CHECK(back.height == img.height);
        CHECK(back.channels == img.channels);
        CHECK(back.pixels == img.pixels);

        std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
        std::stringstream s1, s2;
        s1 << f1.rdbuf();
        s2 << f2.rdbuf();
        CHECK(s1.str() == s2.str());
    }
    CHECK_THROWS_AS(read_png(dir.path() + "/missing.png"), IoError);
}

TEST_CASE("image/tensor conversion and range maps") {
    ImageU8 img;
    img.width = 2;
    img.height = 1;
    img.channels = 1;
    img.pixels = {0, 255};
    Tensor t = image_to_tensor(img);
    CHECK(t.shape() == Shape{1, 1, 1, 2});
    CHECK(t.values()[0] == 0.0f);
    CHECK(t.values()[1] == 1.0f);
    Tensor m = to_model_range(t);
    CHECK(m.values()[0] == -1.0f);
    CHECK(m.values()[1] == 1.0f);
    Tensor e = to_eval_range(m);
    CHECK(e.values()[0] == doctest::Approx(0.0f));
    CHECK(e.values()[1] == doctest::Approx(1.0f));
    ImageU8 back = tensor_to_image(t);
    CHECK(back.pixels == img.pixels);
}

TEST_CASE("bilinear resize: identity at same size, constant stays constant") {
    Rng rng(8);
    Tensor t = random_tensor({1, 3, 7, 5}, rng, false, 0.0f, 1.0f);
    Tensor same = resize_bilinear(t, 7, 5);
    CHECK(same.values() == t.values());
    Tensor c = Tensor::full({1, 1, 4, 4}, 0.37f);
    Tensor up = resize_bilinear(c, 9, 11);
    CHECK(up.shape() == Shape{1, 1, 9, 11});
    for (float v : up.values()) CHECK(v == doctest::Approx(0.37f));
}

TEST_CASE("default pairing tolerance is half the thermal period") {
    CHECK(default_tolerance_ms(6.0) == 83);
    CHECK(default_tolerance_ms(9.0) == 56);
    CHECK_THROWS_AS(default_tolerance_ms(0.0), ContractError);
}
