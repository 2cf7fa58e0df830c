#include "rtnet/pda_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "rtnet/random.hpp"

namespace rtnet {

std::string to_string(CenterLayout l) { return l == CenterLayout::kRing ? "ring" : "simplex"; }

CenterLayout center_layout_from_string(const std::string& s) {
  if (s == "simplex") return CenterLayout::kSimplex;
  if (s == "ring") return CenterLayout::kRing;
  throw ConfigError("unknown center layout '" + s + "' (simplex | ring)");
}

std::string to_string(Domain d) { return d == Domain::kSource ? "source" : "target"; }

void PdaTaskSpec::validate() const {
  if (num_classes < 1) throw ConfigError("task: need at least one class");
  if (shared.empty()) throw ConfigError("task: shared class set is empty");
  std::set<int> seen;
  for (int c : shared) {
    if (c < 0 || c >= num_classes) throw ConfigError("task: shared class " + std::to_string(c) + " out of range");
    if (!seen.insert(c).second) throw ConfigError("task: duplicate shared class " + std::to_string(c));
  }
  if (samples_per_class < 2) throw ConfigError("task: need at least two samples per class");
  if (input_dim < 2) throw ConfigError("task: input_dim must be at least 2");
  if (!(separation > 0)) throw ConfigError("task: separation must be positive");
  if (!(noise >= 0)) throw ConfigError("task: noise must be non-negative");
  if (!(scale > 0)) throw ConfigError("task: scale must be positive");
}

bool Dataset::operator==(const Dataset& o) const {
  return domain == o.domain && num_classes == o.num_classes && inputs.rows() == o.inputs.rows() &&
         inputs.cols() == o.inputs.cols() && inputs == o.inputs && labels == o.labels;
}

namespace {

TensorXd simplex_centers(const PdaTaskSpec& spec, Rng& rng) {
  const Eigen::Index c = spec.num_classes, d = spec.input_dim;
  std::normal_distribution<double> gauss(0.0, 1.0);
  TensorXd centers(c, d);
  if (c <= d) {
    Eigen::MatrixXd g(d, c);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = gauss(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() * Eigen::MatrixXd::Identity(d, c);
    centers = (spec.separation / std::sqrt(2.0)) * q.transpose();
    return centers;
  }
  // more classes than dimensions: rejection sampling
  for (Eigen::Index k = 0; k < c;) {
    for (Eigen::Index j = 0; j < d; ++j) centers(k, j) = gauss(rng) * spec.separation;
    bool ok = true;
    for (Eigen::Index j = 0; j < k && ok; ++j) ok = (centers.row(k) - centers.row(j)).norm() >= spec.separation;
    if (ok) ++k;
  }
  return centers;
}

TensorXd ring_centers(const PdaTaskSpec& spec, Rng& rng) {
  const Eigen::Index c = spec.num_classes;
  constexpr double kPi = 3.14159265358979323846;
  TensorXd centers = TensorXd::Zero(c, spec.input_dim);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * kPi);
  const double phase = phase_dist(rng);
  const double radius = c > 1 ? spec.separation / (2.0 * std::sin(kPi / static_cast<double>(c))) : 0.0;
  for (Eigen::Index k = 0; k < c; ++k) {
    const double angle = phase + 2.0 * kPi * static_cast<double>(k) / static_cast<double>(c);
    centers(k, 0) = radius * std::cos(angle);
    centers(k, 1) = radius * std::sin(angle);
  }
  return centers;
}

TensorXd class_centers(const PdaTaskSpec& spec, Rng& rng) {
  TensorXd centers = spec.layout == CenterLayout::kRing ? ring_centers(spec, rng) : simplex_centers(spec, rng);
  for (Eigen::Index a = 0; a < centers.rows(); ++a)
    for (Eigen::Index b = a + 1; b < centers.rows(); ++b)
      if ((centers.row(a) - centers.row(b)).norm() < spec.separation * (1 - 1e-9))
        throw NumericalError("task: class centers closer than the separation scale");
  return centers;
}

TensorXd blobs(const TensorXd& centers, const std::vector<int>& classes, int per_class, double noise, Rng& rng,
               Labels& labels) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Index rows = static_cast<Eigen::Index>(classes.size()) * per_class;
  TensorXd x(rows, centers.cols());
  labels.resize(rows);
  Eigen::Index r = 0;
  for (int c : classes) {
    for (int i = 0; i < per_class; ++i, ++r) {
      labels[r] = c;
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(r, j) = centers(c, j) + noise * gauss(rng);
    }
  }
  return x;
}

void shift_domain(TensorXd& x, const PdaTaskSpec& spec) {
  const double theta = spec.rotation_deg * 3.14159265358979323846 / 180.0;
  const double cs = std::cos(theta), sn = std::sin(theta);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double a = x(i, 0), b = x(i, 1);
    x(i, 0) = cs * a - sn * b;
    x(i, 1) = sn * a + cs * b;
  }
  x *= spec.scale;
  x.array() += spec.translation;
}

Dataset subset(const TensorXd& x, const Labels& y, const std::vector<Eigen::Index>& idx, int classes) {
  Dataset d;
  d.inputs = gather_rows(x, idx);
  d.labels.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) d.labels[static_cast<Eigen::Index>(k)] = y[idx[k]];
  d.domain = Domain::kTarget;
  d.num_classes = classes;
  return d;
}

}  // namespace

PdaTask gen_pda_task(const PdaTaskSpec& spec) {
  spec.validate();
  Rng center_rng = make_rng(spec.seed, "task/centers");
  Rng source_rng = make_rng(spec.seed, "task/source");
  Rng target_rng = make_rng(spec.seed, "task/target");
  Rng split_rng = make_rng(spec.seed, "task/split");

  PdaTask task;
  task.centers = class_centers(spec, center_rng);

  std::vector<int> all(static_cast<std::size_t>(spec.num_classes));
  std::iota(all.begin(), all.end(), 0);
  task.source.inputs = blobs(task.centers, all, spec.samples_per_class, spec.noise, source_rng, task.source.labels);
  task.source.domain = Domain::kSource;
  task.source.num_classes = spec.num_classes;

  Labels ty;
  TensorXd tx = blobs(task.centers, spec.shared, spec.samples_per_class, spec.noise, target_rng, ty);
  shift_domain(tx, spec);

  // Stratified 50/50 split, then shuffle each half.
  std::vector<Eigen::Index> train, test;
  for (std::size_t k = 0; k < spec.shared.size(); ++k) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(spec.samples_per_class));
    std::iota(idx.begin(), idx.end(), static_cast<Eigen::Index>(k) * spec.samples_per_class);
    std::shuffle(idx.begin(), idx.end(), split_rng);
    const std::size_t half = idx.size() / 2;
    train.insert(train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(half));
    test.insert(test.end(), idx.begin() + static_cast<std::ptrdiff_t>(half), idx.end());
  }
  std::shuffle(train.begin(), train.end(), split_rng);
  std::shuffle(test.begin(), test.end(), split_rng);
  task.target_train = subset(tx, ty, train, spec.num_classes);
  task.target_test = subset(tx, ty, test, spec.num_classes);
  return task;
}

std::vector<BatchPair> make_batches(const Dataset& source, const UnlabeledSet& target, Eigen::Index batch_size,
                                    std::uint64_t seed, int episode) {
  if (batch_size < 2) throw ConfigError("batches: batch size must be at least 2");
  const Eigen::Index limit = std::min(source.size(), target.size());
  if (batch_size > limit)
    throw ConfigError("batches: batch size " + std::to_string(batch_size) + " exceeds the smaller domain (" +
                      std::to_string(limit) + " samples)");
  const auto permutation = [&](Eigen::Index n, std::string_view tag) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    Rng rng = make_rng(seed, tag, static_cast<std::uint64_t>(episode));
    std::shuffle(idx.begin(), idx.end(), rng);
    return idx;
  };
  const auto src = permutation(source.size(), "batches/source");
  const auto tgt = permutation(target.size(), "batches/target");

  const Eigen::Index count = limit / batch_size;
  std::vector<BatchPair> pairs;
  pairs.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index b = 0; b < count; ++b) {
    const auto first = static_cast<std::ptrdiff_t>(b * batch_size);
    const std::vector<Eigen::Index> si(src.begin() + first, src.begin() + first + batch_size);
    const std::vector<Eigen::Index> ti(tgt.begin() + first, tgt.begin() + first + batch_size);
    BatchPair p;
    p.id = static_cast<int>(b) + 1;
    p.source_inputs = gather_rows(source.inputs, si);
    p.source_labels.resize(batch_size);
    for (Eigen::Index k = 0; k < batch_size; ++k) p.source_labels[k] = source.labels[si[static_cast<std::size_t>(k)]];
    p.target_inputs = gather_rows(target.inputs, ti);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  if (d.labels.size() != d.inputs.rows()) throw UsageError("save_dataset: label count does not match rows");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "rtnet-dataset 1\n"
      << "domain " << to_string(d.domain) << "\n"
      << "classes " << d.num_classes << "\n"
      << "rows " << d.inputs.rows() << "\n"
      << "dim " << d.inputs.cols() << "\n";
  char buf[32];
  for (Eigen::Index i = 0; i < d.inputs.rows(); ++i) {
    out << d.labels[i];
    for (Eigen::Index j = 0; j < d.inputs.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", d.inputs(i, j));
      out << ' ' << buf;
    }
    out << '\n';
  }
  if (!out) throw ConfigError("write failed for " + path.string());
}

namespace {

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::istringstream next(const char* what) {
    std::string line;
    if (!std::getline(in_, line)) fail(std::string("unexpected end of file, expected ") + what);
    ++line_;
    return std::istringstream(line);
  }

  template <typename T>
  T header(const std::string& key) {
    auto ss = next(key.c_str());
    std::string k;
    T value{};
    if (!(ss >> k >> value) || k != key) fail("expected '" + key + " <value>'");
    expect_end(ss);
    return value;
  }

  void expect_end(std::istringstream& ss) {
    std::string extra;
    if (ss >> extra) fail("trailing data '" + extra + "'");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_, what); }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
};

// strtod accepts every value %.17g prints, including inf/nan.
bool read_double(std::istringstream& ss, double& v) {
  std::string tok;
  if (!(ss >> tok)) return false;
  char* end = nullptr;
  v = std::strtod(tok.c_str(), &end);
  return end && *end == '\0';
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  LineReader r(in, path.string());

  {
    auto ss = r.next("header");
    std::string magic;
    int version = 0;
    if (!(ss >> magic >> version) || magic != "rtnet-dataset") r.fail("not an rtnet dataset file");
    if (version != 1) r.fail("unsupported dataset version " + std::to_string(version));
  }
  Dataset d;
  const auto domain = r.header<std::string>("domain");
  if (domain == "source")
    d.domain = Domain::kSource;
  else if (domain == "target")
    d.domain = Domain::kTarget;
  else
    r.fail("unknown domain '" + domain + "'");
  d.num_classes = r.header<int>("classes");
  const auto rows = r.header<long long>("rows");
  const auto dim = r.header<long long>("dim");
  if (d.num_classes < 0 || rows < 0 || dim < 0) r.fail("negative size in header");

  d.inputs.resize(rows, dim);
  d.labels.resize(rows);
  for (long long i = 0; i < rows; ++i) {
    auto ss = r.next("data row");
    int label = 0;
    if (!(ss >> label)) r.fail("missing label");
    if (label < 0 || label >= d.num_classes) r.fail("label " + std::to_string(label) + " out of range");
    d.labels[i] = label;
    for (long long j = 0; j < dim; ++j)
      if (!read_double(ss, d.inputs(i, j))) r.fail("expected " + std::to_string(dim) + " values");
    r.expect_end(ss);
  }
  return d;
}

void save_task(const PdaTask& task, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_dataset(task.source, dir / "source.txt");
  save_dataset(task.target_train, dir / "target_train.txt");
  save_dataset(task.target_test, dir / "target_test.txt");
}

PdaTask load_task(const std::filesystem::path& dir) {
  PdaTask task;
  task.source = load_dataset(dir / "source.txt");
  task.target_train = load_dataset(dir / "target_train.txt");
  task.target_test = load_dataset(dir / "target_test.txt");
  return task;
}

}  // namespace rtnet
