#include "rtnet/checkpoint.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rtnet {

std::string checkpoint_filename() { return "checkpoint.v" + std::to_string(kCheckpointVersion); }

namespace {

constexpr std::array<const char*, 6> kNames = {"features", "classifier", "generator_source",
                                               "generator_target", "policy", "value"};

void write_values(std::ostream& out, const double* data, Eigen::Index n) {
  char buf[32];
  for (Eigen::Index i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", data[i]);
    out << (i ? " " : "") << buf;
  }
  out << '\n';
}

void write_network(std::ostream& out, const char* name, const Network& net) {
  out << "network " << name << ' ' << net.depth() << '\n';
  for (const auto& l : net.layers()) {
    out << "layer " << to_string(l.activation) << ' ' << l.out() << ' ' << l.in() << '\n';
    for (Eigen::Index r = 0; r < l.out(); ++r) write_values(out, l.weight.row(r).data(), l.in());
    write_values(out, l.bias.data(), l.out());
  }
}

class Reader {
 public:
  Reader(std::istream& in, std::string src) : in_(in), src_(std::move(src)) {}

  std::istringstream line(const char* what) {
    std::string s;
    if (!std::getline(in_, s)) fail(std::string("unexpected end of file, expected ") + what);
    ++line_;
    return std::istringstream(s);
  }

  void values(double* out, Eigen::Index n) {
    auto ss = line("parameter row");
    for (Eigen::Index i = 0; i < n; ++i) {
      std::string tok;
      if (!(ss >> tok)) fail("expected " + std::to_string(n) + " values");
      char* end = nullptr;
      out[i] = std::strtod(tok.c_str(), &end);
      if (*end != '\0') fail("bad number '" + tok + "'");
    }
    std::string extra;
    if (ss >> extra) fail("trailing data '" + extra + "'");
  }

  Network network(const char* expected) {
    auto ss = line("network header");
    std::string tag, name;
    std::size_t depth = 0;
    if (!(ss >> tag >> name >> depth) || tag != "network") fail("expected 'network <name> <layers>'");
    if (name != expected) fail("expected network '" + std::string(expected) + "', found '" + name + "'");
    if (depth == 0 || depth > 64) fail("implausible layer count");
    std::vector<DenseLayer<double>> layers;
    for (std::size_t k = 0; k < depth; ++k) {
      auto hs = line("layer header");
      std::string lt, act;
      long long out = 0, in = 0;
      if (!(hs >> lt >> act >> out >> in) || lt != "layer" || out <= 0 || in <= 0) fail("expected 'layer <act> <out> <in>'");
      DenseLayer<double> layer;
      try {
        layer.activation = activation_from_string(act);
      } catch (const ConfigError& e) {
        fail(e.what());
      }
      layer.weight.resize(out, in);
      layer.bias.resize(out);
      for (long long r = 0; r < out; ++r) values(layer.weight.row(r).data(), in);
      values(layer.bias.data(), out);
      layers.push_back(std::move(layer));
    }
    try {
      return Network(std::move(layers));
    } catch (const ConfigError& e) {
      fail(e.what());
    }
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(src_, line_, what); }

 private:
  std::istream& in_;
  std::string src_;
  std::size_t line_ = 0;
};

}  // namespace

void save_checkpoint(const RtNetModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "rtnet-checkpoint " << kCheckpointVersion << "\nnetworks " << kNames.size() << '\n';
  write_network(out, kNames[0], m.da.features);
  write_network(out, kNames[1], m.da.classifier);
  write_network(out, kNames[2], m.generators.source);
  write_network(out, kNames[3], m.generators.target);
  write_network(out, kNames[4], m.selector.policy);
  write_network(out, kNames[5], m.selector.value);
  out << "end\n";
  if (!out) throw ConfigError("write failed for " + path.string());
}

RtNetModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  Reader r(in, path.string());
  {
    auto ss = r.line("header");
    std::string magic;
    int version = 0;
    if (!(ss >> magic >> version) || magic != "rtnet-checkpoint") r.fail("not an rtnet checkpoint");
    if (version != kCheckpointVersion) r.fail("unsupported checkpoint version " + std::to_string(version));
    auto ns = r.line("network count");
    std::string tag;
    std::size_t count = 0;
    if (!(ns >> tag >> count) || tag != "networks" || count != kNames.size()) r.fail("expected 'networks 6'");
  }
  Network f = r.network(kNames[0]);
  Network c = r.network(kNames[1]);
  Network gs = r.network(kNames[2]);
  Network gt = r.network(kNames[3]);
  Network p = r.network(kNames[4]);
  Network v = r.network(kNames[5]);
  auto es = r.line("end marker");
  std::string tail;
  if (!(es >> tail) || tail != "end") r.fail("expected 'end'");
  try {
    return RtNetModel{DaModel(std::move(f), std::move(c)), GeneratorPair(std::move(gs), std::move(gt)),
                      Selector(std::move(p), std::move(v))};
  } catch (const ConfigError& e) {
    r.fail(e.what());
  }
}

}  // namespace rtnet
