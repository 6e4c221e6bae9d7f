#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cll/data.hpp"
#include "cll/dataset_io.hpp"
#include "cll/error.hpp"

namespace {

using namespace cll;
namespace fs = std::filesystem;

SyntheticSpec blob_spec(std::uint64_t seed = 1) {
  SyntheticSpec s;
  s.num_classes = 4;
  s.dims = 3;
  s.per_class = 500;
  s.class_means = circle_means(4, 3, 2.0);
  s.class_stddev = 0.5;
  s.seed = seed;
  return s;
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("cll_data_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

TEST(CircleMeans, EvenlySpacedOnCircle) {
  const auto m = circle_means(5, 2, 3.0);
  ASSERT_EQ(m.size(), 5u);
  for (int c = 0; c < 5; ++c) {
    EXPECT_NEAR(std::hypot(m[c][0], m[c][1]), 3.0, 1e-12);
    const auto& n = m[(c + 1) % 5];
    EXPECT_NEAR(std::hypot(m[c][0] - n[0], m[c][1] - n[1]), 6.0 * std::sin(M_PI / 5), 1e-12);
  }
  EXPECT_EQ(circle_means(3, 4, 1.0)[1][3], 0.0);
  EXPECT_THROW(circle_means(3, 1, 1.0), ValidationError);
}

TEST(GenerateSynthetic, ShapeOrderAndMoments) {
  const auto spec = blob_spec();
  const auto d = generate_synthetic(spec);
  ASSERT_EQ(d.size(), 2000u);
  EXPECT_EQ(d.generator, "gaussian-blobs");
  ASSERT_TRUE(d.synthetic.has_value());
  for (int c = 0; c < 4; ++c) {
    std::vector<double> mean(3, 0.0);
    double var = 0.0;
    for (int i = 0; i < 500; ++i) {
      const std::size_t idx = c * 500 + i;
      EXPECT_EQ(d.labels[idx], c);
      for (int j = 0; j < 3; ++j) mean[j] += d.features[idx][j] / 500;
    }
    for (int i = 0; i < 500; ++i)
      for (int j = 0; j < 3; ++j) {
        const double v = d.features[c * 500 + i][j] - spec.class_means[c][j];
        var += v * v / 1500;
      }
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(mean[j], spec.class_means[c][j], 0.1);
    EXPECT_NEAR(std::sqrt(var), 0.5, 0.03);
  }
}

TEST(GenerateSynthetic, Deterministic) {
  EXPECT_EQ(generate_synthetic(blob_spec(3)), generate_synthetic(blob_spec(3)));
  EXPECT_NE(generate_synthetic(blob_spec(3)).features, generate_synthetic(blob_spec(4)).features);
}

TEST(SyntheticSpec, Validation) {
  auto s = blob_spec();
  s.class_stddev = 0.0;
  EXPECT_THROW(generate_synthetic(s), ValidationError);
  s = blob_spec();
  s.class_means.pop_back();
  EXPECT_THROW(generate_synthetic(s), ValidationError);
  s = blob_spec();
  s.class_means[1] = s.class_means[0];
  EXPECT_THROW(generate_synthetic(s), ValidationError);
  s = blob_spec();
  s.per_class = 0;
  EXPECT_THROW(generate_synthetic(s), ValidationError);
}

TEST(GaussianPosterior, IsBayesPosterior) {
  const auto spec = blob_spec();
  const auto post = gaussian_posterior(spec);
  const std::vector<double> x{0.3, -0.7, 0.2};
  std::vector<double> dens(4);
  double total = 0.0;
  for (int c = 0; c < 4; ++c) {
    double d2 = 0.0;
    for (int j = 0; j < 3; ++j) d2 += (x[j] - spec.class_means[c][j]) * (x[j] - spec.class_means[c][j]);
    dens[c] = std::exp(-d2 / (2 * 0.25));
    total += dens[c];
  }
  const auto p = post(x);
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(p[c], dens[c] / total, 1e-12);
  const auto hot = gaussian_posterior(spec, 100.0)(x);
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(hot[c], 0.25, 0.05);
  EXPECT_THROW(gaussian_posterior(spec, 0.0), ValidationError);
  EXPECT_THROW(post(std::vector<double>{1.0}), ValidationError);
}

TEST(RestrictClasses, RelabelsDensely) {
  const auto d = generate_synthetic(blob_spec());
  const auto r = restrict_classes(d, {3, 1});
  EXPECT_EQ(r.num_classes, 2);
  EXPECT_EQ(r.size(), 1000u);
  EXPECT_EQ(r.labels.front(), 0);
  EXPECT_EQ(r.labels.back(), 1);
  EXPECT_EQ(r.features.front(), d.features[500]);
  EXPECT_THROW(restrict_classes(d, {1}), ValidationError);
  EXPECT_THROW(restrict_classes(d, {1, 9}), ValidationError);
}

TEST(DatasetIo, LabeledRoundTripIsExact) {
  auto d = generate_synthetic(blob_spec());
  d.features[0][0] = 0.1 + 0.2;
  d.features[1][1] = 5e-324;
  std::stringstream ss;
  write_labeled(ss, d);
  EXPECT_EQ(read_labeled(ss), d);
}

TEST(DatasetIo, AnnotatedRoundTripIsExact) {
  AnnotatedDataset a;
  a.num_classes = 4;
  a.candidate_count = 2;
  a.seed = 18446744073709551615ULL;
  a.generator = "test";
  a.examples = {{{1.0 / 3, -2.5}, CandidateSet(4, {0, 3}), 1}, {{1e300, -0.0}, CandidateSet(4, {1, 2}), std::nullopt}};
  std::stringstream ss;
  write_annotated(ss, a);
  const auto b = read_annotated(ss);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(std::signbit(b.examples[1].x[1]));
}

TEST(DatasetIo, MalformedInput) {
  auto parse = [](const std::string& text) {
    std::stringstream ss(text);
    return read_annotated(ss);
  };
  const std::string header = R"({"format":"cll-dataset","version":1,"kind":"annotated","K":3,"N":1,"seed":0,"generator":"g"})";
  EXPECT_THROW(parse(""), ValidationError);
  EXPECT_THROW(parse("{oops"), ValidationError);
  EXPECT_THROW(parse(R"({"format":"cll-dataset","version":2,"kind":"annotated"})"), ValidationError);
  EXPECT_THROW(parse(header + "\n{\"x\":[1],\"Y\":[0,1],\"y\":0}\n"), HeterogeneousDataset);
  EXPECT_THROW(parse(header + "\n{\"x\":[1],\"Y\":[0],\"y\":7}\n"), ValidationError);
  EXPECT_THROW(parse(header + "\n{\"x\":[1],\"Y\":[5],\"y\":0}\n"), InvalidCandidateSet);
  EXPECT_THROW(parse(header + "\n{\"x\":[1],\"Y\":[0],\"y\":0}\n{\"x\":[1,2],\"Y\":[0],\"y\":0}\n"), ValidationError);
  try {
    parse(header + "\n{\"x\":[1],\"Y\":[0],\"y\":0}\n{\"x\":\"a\",\"Y\":[0]}\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::stringstream labeled("{\"format\":\"cll-dataset\",\"version\":1,\"kind\":\"labeled\"}\n");
  EXPECT_THROW(read_annotated(labeled), ValidationError);
}

TEST(DatasetIo, NonFiniteFeaturesRejected) {
  LabeledDataset d;
  d.num_classes = 2;
  d.dims = 1;
  d.features = {{std::nan("")}};
  d.labels = {0};
  std::stringstream ss;
  EXPECT_THROW(write_labeled(ss, d), ValidationError);
}

TEST(DatasetIo, FilesSniffingAndLoading) {
  TempDir tmp;
  const auto spec = blob_spec();
  write_synthetic_spec(tmp.path / "spec.json", spec);
  EXPECT_EQ(sniff_dataset_kind(tmp.path / "spec.json"), "synthetic");
  EXPECT_EQ(read_synthetic_spec(tmp.path / "spec.json"), spec);
  EXPECT_EQ(load_dataset(tmp.path / "spec.json"), generate_synthetic(spec));

  const auto d = generate_synthetic(spec);
  save_labeled(tmp.path / "d.jsonl", d);
  EXPECT_EQ(sniff_dataset_kind(tmp.path / "d.jsonl"), "labeled");
  EXPECT_EQ(load_dataset(tmp.path / "d.jsonl"), d);

  const auto a = as_ordinary_labels(d);
  EXPECT_EQ(a.candidate_count, 1);
  EXPECT_EQ(a.examples[7].Y, CandidateSet(4, {d.labels[7]}));
  save_annotated(tmp.path / "a.jsonl", a);
  EXPECT_EQ(sniff_dataset_kind(tmp.path / "a.jsonl"), "annotated");
  EXPECT_EQ(load_annotated(tmp.path / "a.jsonl"), a);
  EXPECT_EQ(load_dataset(tmp.path / "a.jsonl").labels, d.labels);

  std::ofstream(tmp.path / "junk.txt") << "hello\n";
  EXPECT_THROW(sniff_dataset_kind(tmp.path / "junk.txt"), ValidationError);
  EXPECT_THROW(load_dataset(tmp.path / "missing.jsonl"), ValidationError);
}

}  // namespace
