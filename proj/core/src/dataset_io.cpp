#include "cll/dataset_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "cll/error.hpp"

namespace cll {
namespace {

using nlohmann::json;

constexpr const char* kDatasetFormat = "cll-dataset";
constexpr const char* kSpecFormat = "cll-synthetic-spec";
constexpr int kVersion = 1;

json spec_to_json(const SyntheticSpec& s) {
  return {{"format", kSpecFormat}, {"version", kVersion},   {"K", s.num_classes},
          {"dims", s.dims},        {"per_class", s.per_class}, {"class_stddev", s.class_stddev},
          {"seed", s.seed},        {"class_means", s.class_means}};
}

SyntheticSpec spec_from_json(const json& j) {
  SyntheticSpec s;
  s.num_classes = j.at("K").get<int>();
  s.dims = j.at("dims").get<int>();
  s.per_class = j.at("per_class").get<int>();
  s.class_stddev = j.at("class_stddev").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.class_means = j.at("class_means").get<std::vector<std::vector<double>>>();
  s.validate();
  return s;
}

void check_finite(const std::vector<double>& x) {
  for (double v : x)
    if (!std::isfinite(v)) throw ValidationError("dataset features must be finite to be persisted");
}

// Wraps nlohmann errors with the line number.
template <typename F>
auto with_line(std::size_t line, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ValidationError("dataset line " + std::to_string(line) + ": " + e.what());
  }
}

json read_header(std::istream& in, std::string_view expected_kind) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("dataset file is empty");
  return with_line(1, [&] {
    json h = json::parse(line);
    if (h.at("format") != kDatasetFormat) throw ValidationError("not a cll dataset file");
    if (h.at("version") != kVersion) throw ValidationError("unsupported dataset version");
    if (h.at("kind") != expected_kind)
      throw ValidationError("expected a " + std::string(expected_kind) + " dataset, found " +
                            h.at("kind").get<std::string>());
    return h;
  });
}

}  // namespace

void write_labeled(std::ostream& out, const LabeledDataset& d) {
  json h = {{"format", kDatasetFormat}, {"version", kVersion}, {"kind", "labeled"}, {"K", d.num_classes},
            {"dims", d.dims},           {"seed", d.seed},      {"generator", d.generator}};
  h["synthetic"] = d.synthetic ? spec_to_json(*d.synthetic) : json(nullptr);
  out << h.dump() << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    check_finite(d.features[i]);
    out << json{{"x", d.features[i]}, {"y", d.labels[i]}}.dump() << '\n';
  }
}

void write_annotated(std::ostream& out, const AnnotatedDataset& d) {
  json h = {{"format", kDatasetFormat}, {"version", kVersion}, {"kind", "annotated"},       {"K", d.num_classes},
            {"N", d.candidate_count},   {"seed", d.seed},      {"generator", d.generator}};
  out << h.dump() << '\n';
  for (const auto& ex : d.examples) {
    check_finite(ex.x);
    json r = {{"x", ex.x}, {"Y", std::vector<int>(ex.Y.begin(), ex.Y.end())}};
    r["y"] = ex.true_label ? json(*ex.true_label) : json(nullptr);
    out << r.dump() << '\n';
  }
}

LabeledDataset read_labeled(std::istream& in) {
  const json h = read_header(in, "labeled");
  LabeledDataset d;
  with_line(1, [&] {
    d.num_classes = h.at("K").get<int>();
    d.dims = h.at("dims").get<int>();
    d.seed = h.at("seed").get<std::uint64_t>();
    d.generator = h.at("generator").get<std::string>();
    if (!h.at("synthetic").is_null()) d.synthetic = spec_from_json(h.at("synthetic"));
    return 0;
  });
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    with_line(lineno, [&] {
      const json r = json::parse(line);
      auto x = r.at("x").get<std::vector<double>>();
      const int y = r.at("y").get<int>();
      if (static_cast<int>(x.size()) != d.dims) throw ValidationError("feature vector has the wrong dimension");
      if (y < 0 || y >= d.num_classes) throw ValidationError("label outside [0, K)");
      d.features.push_back(std::move(x));
      d.labels.push_back(y);
      return 0;
    });
  }
  return d;
}

AnnotatedDataset read_annotated(std::istream& in) {
  const json h = read_header(in, "annotated");
  AnnotatedDataset d;
  with_line(1, [&] {
    d.num_classes = h.at("K").get<int>();
    d.candidate_count = h.at("N").get<int>();
    d.seed = h.at("seed").get<std::uint64_t>();
    d.generator = h.at("generator").get<std::string>();
    return 0;
  });
  if (d.num_classes < 2) throw ValidationError("annotated dataset needs K >= 2");
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    with_line(lineno, [&] {
      const json r = json::parse(line);
      AnnotatedExample ex{r.at("x").get<std::vector<double>>(), CandidateSet(d.num_classes, r.at("Y").get<std::vector<int>>()),
                          std::nullopt};
      if (!r.at("y").is_null()) {
        const int y = r.at("y").get<int>();
        if (y < 0 || y >= d.num_classes) throw ValidationError("true label outside [0, K)");
        ex.true_label = y;
      }
      if (!d.examples.empty() && ex.x.size() != d.examples.front().x.size())
        throw ValidationError("feature vector has the wrong dimension");
      if (d.candidate_count != 0 && ex.Y.size() != d.candidate_count)
        throw HeterogeneousDataset("record has |Y|=" + std::to_string(ex.Y.size()) + " but the header says N=" +
                                   std::to_string(d.candidate_count));
      d.examples.push_back(std::move(ex));
      return 0;
    });
  }
  return d;
}

void save_labeled(const std::filesystem::path& path, const LabeledDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_labeled(out, data);
}

void save_annotated(const std::filesystem::path& path, const AnnotatedDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_annotated(out, data);
}

AnnotatedDataset load_annotated(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  return read_annotated(in);
}

std::string sniff_dataset_kind(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  return with_line(1, [&]() -> std::string {
    json h = json::parse(line, nullptr, false);
    if (h.is_discarded()) {
      // Spec files are a single pretty-printed JSON document.
      in.clear();
      in.seekg(0);
      h = json::parse(in, nullptr, false);
    }
    if (h.is_discarded() || !h.is_object()) throw ValidationError(path.string() + " is not a cll dataset or spec file");
    const auto format = h.value("format", std::string{});
    if (format == kSpecFormat) return "synthetic";
    if (format == kDatasetFormat) return h.at("kind").get<std::string>();
    throw ValidationError(path.string() + " has unknown format '" + format + "'");
  });
}

SyntheticSpec read_synthetic_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  return with_line(1, [&] {
    const json j = json::parse(in);
    if (j.at("format") != kSpecFormat) throw ValidationError("not a synthetic spec file");
    return spec_from_json(j);
  });
}

void write_synthetic_spec(const std::filesystem::path& path, const SyntheticSpec& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << spec_to_json(spec).dump(2) << '\n';
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
  const std::string kind = sniff_dataset_kind(path);
  if (kind == "synthetic") return generate_synthetic(read_synthetic_spec(path));
  std::ifstream in(path, std::ios::binary);
  if (kind == "labeled") return read_labeled(in);
  const AnnotatedDataset a = read_annotated(in);
  LabeledDataset d;
  d.num_classes = a.num_classes;
  d.seed = a.seed;
  d.generator = a.generator;
  for (const auto& ex : a.examples) {
    if (!ex.true_label) throw ValidationError("annotated example without a true label cannot be used as labeled data");
    d.features.push_back(ex.x);
    d.labels.push_back(*ex.true_label);
  }
  d.dims = d.features.empty() ? 0 : static_cast<int>(d.features.front().size());
  return d;
}

AnnotatedDataset as_ordinary_labels(const LabeledDataset& data) {
  AnnotatedDataset out;
  out.num_classes = data.num_classes;
  out.candidate_count = 1;
  out.seed = data.seed;
  out.generator = data.generator + "+ordinary";
  out.examples.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    out.examples.push_back({data.features[i], CandidateSet(data.num_classes, {data.labels[i]}), data.labels[i]});
  return out;
}

}  // namespace cll
