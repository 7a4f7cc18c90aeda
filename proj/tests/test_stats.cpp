#include "doctest.h"

#include <algorithm>
#include <random>

#include "latent_morph/stats.hpp"
#include "support/brute_force.hpp"
#include "support/fixtures.hpp"

using namespace latent_morph;

namespace {

constexpr double kTol = 1e-12;

bool same(const std::optional<double>& a, const std::optional<double>& b, double tol = kTol) {
  if (a.has_value() != b.has_value()) return false;
  return !a || std::abs(*a - *b) <= tol;
}

std::vector<double> random_series(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 50.0);
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

MeasurementVector random_measurements(std::mt19937_64& rng, const std::string& id) {
  const Protocol protocol = (rng() % 4 == 0) ? Protocol::Dlib68 : Protocol::FacePP106;
  return compute_measurements(fixtures::random_landmarks(rng, protocol, id), MeasurementTable::builtin());
}

std::vector<MeasuredSample> random_samples(std::mt19937_64& rng, int subjects) {
  const std::vector<std::string> dirs{"eyes", "chin", "age"};
  std::uniform_int_distribution<int> mag(-8, 8);
  std::vector<MeasuredSample> out;
  for (int s = 0; s < subjects; ++s) {
    const std::string subject = fmt::format("s{}", s);
    out.push_back({subject, std::nullopt, 0.0, random_measurements(rng, subject)});
    const int variants = static_cast<int>(rng() % 7);
    for (int v = 0; v < variants; ++v) {
      out.push_back({subject, dirs[rng() % dirs.size()], 5.0 * mag(rng), random_measurements(rng, subject)});
    }
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace

TEST_CASE("pearson agrees with the brute-force oracle") {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 3 + rng() % 30;
    const auto x = random_series(rng, n), y = random_series(rng, n);
    CHECK(same(pearson(x, y), brute::pearson(x, y)));
  }
}

TEST_CASE("pearson is symmetric and invariant to positive affine maps") {
  std::mt19937_64 rng(62);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 3 + rng() % 30;
    const auto x = random_series(rng, n), y = random_series(rng, n);
    const double r = *pearson(x, y);
    CHECK(std::abs(r - *pearson(y, x)) <= 1e-9);
    std::vector<double> ax(x), ay(y);
    for (auto& v : ax) v = 3.5 * v - 17.0;
    for (auto& v : ay) v = 0.25 * v + 1000.0;
    CHECK(std::abs(r - *pearson(ax, ay)) <= 1e-9);
    for (auto& v : ax) v = -v;
    CHECK(std::abs(r + *pearson(ax, ay)) <= 1e-9);
    CHECK(r >= -1.0);
    CHECK(r <= 1.0);
  }
}

TEST_CASE("pearson is undefined for constant series and n < 3") {
  const std::vector<double> c{2, 2, 2, 2}, v{1, 2, 3, 4};
  CHECK_FALSE(pearson(c, v));
  CHECK_FALSE(pearson(v, c));
  CHECK_FALSE(pearson(std::vector<double>{1, 2}, std::vector<double>{3, 5}));
  CHECK(*pearson(v, v) == doctest::Approx(1.0));
  CHECK_THROWS(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}));
}

TEST_CASE("landmark displacement and variability agree with the oracle") {
  std::mt19937_64 rng(63);
  for (int trial = 0; trial < 30; ++trial) {
    const Protocol protocol = (trial % 2) ? Protocol::Dlib68 : Protocol::FacePP106;
    const int n = 2 + static_cast<int>(rng() % 9);
    std::vector<AlignedProjectedPair> pairs;
    std::vector<LandmarkSet> images;
    for (int i = 0; i < n; ++i) {
      const auto a = fixtures::random_landmarks(rng, protocol, fmt::format("i{}", i));
      pairs.push_back({a, fixtures::jittered(rng, a, a.image_id(), 20)});
      images.push_back(a);
    }
    const auto disp = landmark_displacement(pairs);
    const auto want_disp = brute::displacement(pairs);
    REQUIRE(disp.size() == want_disp.size());
    for (std::size_t k = 0; k < disp.size(); ++k) {
      CHECK(disp[k].landmark_key == want_disp[k].first);
      CHECK(std::abs(disp[k].value - want_disp[k].second) <= kTol);
      CHECK(disp[k].n == static_cast<std::size_t>(n));
    }
    const auto var = landmark_variability(images);
    const auto want_var = brute::variability(images);
    REQUIRE(var.size() == want_var.size());
    for (std::size_t k = 0; k < var.size(); ++k) {
      CHECK(var[k].landmark_key == want_var[k].first);
      CHECK(std::abs(var[k].value - want_var[k].second) <= kTol * std::max(1.0, want_var[k].second));
    }

    // Order of images does not matter beyond rounding.
    std::shuffle(images.begin(), images.end(), rng);
    const auto var2 = landmark_variability(images);
    for (std::size_t k = 0; k < var.size(); ++k) CHECK(std::abs(var[k].value - var2[k].value) <= 1e-9);
  }
  CHECK_THROWS_AS(landmark_displacement(std::vector<AlignedProjectedPair>{}), ValidationError);
  std::mt19937_64 one(1);
  CHECK_THROWS_AS(landmark_variability(std::vector<LandmarkSet>{fixtures::random_landmarks(one, Protocol::Dlib68, "a")}),
                  ValidationError);
}

TEST_CASE("displacement of identical sets is zero") {
  std::mt19937_64 rng(64);
  const auto a = fixtures::random_landmarks(rng, Protocol::FacePP106, "a");
  const std::vector<AlignedProjectedPair> pairs{{a, a}};
  for (const auto& row : landmark_displacement(pairs)) CHECK(row.value == 0.0);
}

TEST_CASE("cross-protocol discrepancy agrees with the oracle") {
  std::mt19937_64 rng(65);
  const CorrespondenceMap map = CorrespondenceMap::builtin();
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 10);
    std::vector<ProtocolPair> images;
    for (int i = 0; i < n; ++i) {
      const std::string id = fmt::format("i{}", i);
      images.push_back({fixtures::random_landmarks(rng, Protocol::FacePP106, id),
                        fixtures::random_landmarks(rng, Protocol::Dlib68, id)});
    }
    const auto rows = cross_protocol_discrepancy(images, map);
    const auto want = brute::discrepancy(images, map);
    REQUIRE(rows.size() == 23);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      CHECK(rows[k].dlib_index == map.pairs()[k].dlib_index);
      CHECK(rows[k].facepp_key == map.pairs()[k].facepp_key);
      CHECK(rows[k].substitute == map.pairs()[k].substitute);
      CHECK(std::abs(rows[k].mean_distance - want[k]) <= kTol * std::max(1.0, want[k]));
    }
  }
}

TEST_CASE("aligned-projected correlation agrees with the oracle") {
  std::mt19937_64 rng(66);
  const auto abbrs = MeasurementTable::builtin().abbreviations();
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 10);
    std::vector<MeasurementPair> pairs;
    for (int i = 0; i < n; ++i) {
      const std::string id = fmt::format("i{}", i);
      pairs.push_back({random_measurements(rng, id), random_measurements(rng, id)});
    }
    const auto cells = aligned_projected_correlation(pairs, abbrs);
    REQUIRE(cells.size() == abbrs.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
      CHECK(cells[k].row_label == abbrs[k]);
      CHECK(same(cells[k].r, brute::aligned_projected(pairs, abbrs[k])));
    }
  }
}

TEST_CASE("identical aligned and projected measurements correlate perfectly") {
  std::mt19937_64 rng(67);
  std::vector<MeasurementPair> pairs;
  for (int i = 0; i < 8; ++i) {
    const auto m = random_measurements(rng, "x");
    pairs.push_back({m, m});
  }
  const auto abbrs = MeasurementTable::builtin().abbreviations();
  for (const auto& cell : aligned_projected_correlation(pairs, abbrs)) {
    if (cell.n >= 3) {
      REQUIRE(cell.r);
      CHECK(*cell.r == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("parameter correlation agrees with the oracle, pooled and per image") {
  std::mt19937_64 rng(68);
  const auto abbrs = MeasurementTable::builtin().abbreviations();
  const std::vector<std::string> dirs{"eyes", "chin", "age", "absent"};
  for (int trial = 0; trial < 30; ++trial) {
    const auto samples = random_samples(rng, 1 + static_cast<int>(rng() % 10));
    for (Pooling pooling : {Pooling::Pooled, Pooling::PerImageMean}) {
      const auto m = parameter_measurement_correlation(samples, abbrs, dirs, pooling);
      CHECK(m.rows == abbrs);
      CHECK(m.columns == dirs);
      for (const auto& a : abbrs) {
        for (const auto& d : dirs) {
          CHECK(same(m.at(a, d).r, brute::parameter(samples, a, d, pooling == Pooling::PerImageMean)));
        }
      }
    }
  }
}

TEST_CASE("parameter correlation does not depend on sample order") {
  std::mt19937_64 rng(69);
  const auto abbrs = MeasurementTable::builtin().abbreviations();
  const std::vector<std::string> dirs{"eyes", "chin", "age"};
  auto samples = random_samples(rng, 10);
  const auto a = parameter_measurement_correlation(samples, abbrs, dirs);
  std::shuffle(samples.begin(), samples.end(), rng);
  const auto b = parameter_measurement_correlation(samples, abbrs, dirs);
  for (const auto& r : abbrs) {
    for (const auto& d : dirs) CHECK(same(a.at(r, d).r, b.at(r, d).r, 1e-9));
  }
  CHECK_THROWS_AS(a.at("xx", "eyes"), LookupError);
}

TEST_CASE("summaries") {
  CHECK_THROWS_AS(summarize(std::vector<double>{}), ValidationError);
  const Summary s = summarize(std::vector<double>{3, 1, 2});
  CHECK(s.mean == 2.0);
  CHECK(s.min == 1.0);
  CHECK(s.max == 3.0);
  CHECK(s.count == 3);
  const std::vector<CorrelationCell> cells{{"a", "b", 0.5, 4}, {"a", "c", std::nullopt, 2}, {"a", "d", -0.5, 4}};
  const Summary c = summarize(cells);
  CHECK(c.count == 2);
  CHECK(c.mean == 0.0);
}
