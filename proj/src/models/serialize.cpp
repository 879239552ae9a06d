#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/core.h>

#include "tollcast/core/digest.hpp"
#include "tollcast/models/model.hpp"

namespace tollcast::models {

namespace {

constexpr std::string_view kMagic{"TOLLCAST", 8};
constexpr std::size_t kChecksumBytes = 32;

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void raw(std::string_view s) { buf_.append(s); }
  std::string& bytes() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view b) : b_(b) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(b_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const auto n = u32();
    need(n);
    std::string s(b_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw ArtifactFormatError("model artifact payload ends early");
  }
  std::string_view b_;
  std::size_t pos_ = 0;
};

void put_adam(Writer& w, const AdamSettings& a) {
  w.f64(a.learning_rate);
  w.f64(a.beta1);
  w.f64(a.beta2);
  w.f64(a.epsilon);
}

AdamSettings get_adam(Reader& r) {
  AdamSettings a;
  a.learning_rate = r.f64();
  a.beta1 = r.f64();
  a.beta2 = r.f64();
  a.epsilon = r.f64();
  return a;
}

void put_params(Writer& w, const numkit::ParamSet& p) {
  w.u32(static_cast<std::uint32_t>(p.size()));
  for (const auto& param : p.params()) {
    w.str(param.name);
    w.u8(static_cast<std::uint8_t>(param.role));
    w.u32(static_cast<std::uint32_t>(param.value.rank()));
    for (auto d : param.value.shape()) w.u64(d);
    for (double v : param.value.values()) w.f64(v);
  }
}

numkit::ParamSet get_params(Reader& r) {
  numkit::ParamSet p;
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = r.str();
    const auto role = static_cast<numkit::ParamRole>(r.u8());
    const auto rank = r.u32();
    std::vector<std::size_t> shape(rank);
    std::size_t count = 1;
    for (auto& d : shape) {
      d = r.u64();
      count *= d;
    }
    std::vector<double> values(count);
    for (auto& v : values) v = r.f64();
    p.add(std::move(name), role, numkit::Tensor(std::move(shape), std::move(values)));
  }
  return p;
}

void put_doubles(Writer& w, const std::vector<double>& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (double x : v) w.f64(x);
}

std::vector<double> get_doubles(Reader& r) {
  std::vector<double> v(r.u32());
  for (auto& x : v) x = r.f64();
  return v;
}

void put_standardizer(Writer& w, const Standardizer& s) {
  put_doubles(w, s.mean);
  put_doubles(w, s.scale);
}

Standardizer get_standardizer(Reader& r) {
  Standardizer s;
  s.mean = get_doubles(r);
  s.scale = get_doubles(r);
  return s;
}

void put_forest(Writer& w, const Forest& f) {
  w.i32(f.params.n_trees);
  w.i32(f.params.max_depth);
  w.i32(f.params.min_leaf_size);
  w.i32(f.params.features_per_split);
  w.i32(f.params.threads);
  w.u32(static_cast<std::uint32_t>(f.trees.size()));
  for (const auto& t : f.trees) {
    w.u32(static_cast<std::uint32_t>(t.nodes.size()));
    for (const auto& n : t.nodes) {
      w.i32(n.feature);
      w.f64(n.threshold);
      w.i32(n.left);
      w.i32(n.right);
      w.f64(n.value);
    }
  }
}

Forest get_forest(Reader& r) {
  Forest f;
  f.params.n_trees = r.i32();
  f.params.max_depth = r.i32();
  f.params.min_leaf_size = r.i32();
  f.params.features_per_split = r.i32();
  f.params.threads = r.i32();
  f.trees.resize(r.u32());
  for (auto& t : f.trees) {
    t.nodes.resize(r.u32());
    for (auto& n : t.nodes) {
      n.feature = r.i32();
      n.threshold = r.f64();
      n.left = r.i32();
      n.right = r.i32();
      n.value = r.f64();
      const auto limit = static_cast<std::int32_t>(t.nodes.size());
      if (n.feature >= 0 && (n.left < 0 || n.left >= limit || n.right < 0 || n.right >= limit)) {
        throw ArtifactFormatError("tree node points outside its tree");
      }
    }
    if (t.nodes.empty()) throw ArtifactFormatError("empty tree in artifact");
  }
  return f;
}

}  // namespace

std::string serialize_model(const ModelArtifact& a) {
  Writer w;
  w.raw(kMagic);
  w.u32(kModelFormatVersion);
  w.u8(static_cast<std::uint8_t>(a.algorithm));
  w.u8(static_cast<std::uint8_t>(a.target_kind));
  w.u8(static_cast<std::uint8_t>(a.horizon.value()));
  w.str(a.schema_hash);
  w.u64(a.seed);
  w.str(a.info.stats_source);
  w.u64(a.info.train_rows);
  w.str(a.info.train_days_digest);
  w.u32(a.info.epochs_run);
  w.f64(a.info.best_validation_mape);

  switch (a.algorithm) {
    case Algorithm::Persistence: break;
    case Algorithm::RandomForest: put_forest(w, std::get<Forest>(a.payload)); break;
    case Algorithm::Mlp: {
      const auto& m = std::get<MlpModel>(a.payload);
      for (int h : m.params.hidden) w.i32(h);
      w.f64(m.params.l2);
      w.i32(m.params.batch_size);
      w.i32(m.params.max_epochs);
      w.i32(m.params.patience);
      put_adam(w, m.params.adam);
      put_standardizer(w, m.standardizer);
      w.f64(m.target_scale);
      put_params(w, m.net);
      break;
    }
    case Algorithm::Lstm: {
      const auto& m = std::get<LstmModel>(a.payload);
      w.i32(m.params.lookback);
      w.i32(m.params.hidden);
      for (int d : m.params.dense) w.i32(d);
      w.f64(m.params.l2);
      w.i32(m.params.batch_size);
      w.i32(m.params.max_epochs);
      w.i32(m.params.patience);
      put_adam(w, m.params.adam);
      put_standardizer(w, m.standardizer);
      w.f64(m.target_scale);
      put_params(w, m.net);
      break;
    }
  }
  const Sha256 sum = sha256(w.bytes());
  w.raw(std::string_view(reinterpret_cast<const char*>(sum.data()), sum.size()));
  return std::move(w.bytes());
}

ModelArtifact deserialize_model(std::string_view bytes) {
  const std::string expect = fmt::format("expected format version {}", kModelFormatVersion);
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw ArtifactFormatError("not a tollcast model artifact (" + expect + ")");
  }
  if (bytes.size() < kMagic.size() + 4 + kChecksumBytes) {
    throw ArtifactFormatError("model artifact truncated: checksum missing (" + expect + ")");
  }
  Reader head(bytes.substr(kMagic.size(), 4));
  const auto version = head.u32();
  if (version != kModelFormatVersion) {
    throw ArtifactFormatError(
        fmt::format("unsupported model format version {} ({})", version, expect));
  }
  const auto body = bytes.substr(0, bytes.size() - kChecksumBytes);
  const Sha256 sum = sha256(body);
  if (std::memcmp(sum.data(), bytes.data() + body.size(), kChecksumBytes) != 0) {
    throw ArtifactFormatError("model artifact checksum mismatch, file truncated or corrupt (" +
                              expect + ")");
  }

  Reader r(body.substr(kMagic.size() + 4));
  ModelArtifact a;
  const auto algo = r.u8();
  if (algo > static_cast<std::uint8_t>(Algorithm::Lstm)) {
    throw ArtifactFormatError(fmt::format("unknown algorithm code {}", algo));
  }
  a.algorithm = static_cast<Algorithm>(algo);
  const auto kind = r.u8();
  if (kind > static_cast<std::uint8_t>(TargetKind::TravelTimeDifference)) {
    throw ArtifactFormatError(fmt::format("unknown target kind code {}", kind));
  }
  a.target_kind = static_cast<TargetKind>(kind);
  a.horizon = HorizonIndex{r.u8()};
  a.schema_hash = r.str();
  a.seed = r.u64();
  a.info.stats_source = r.str();
  a.info.train_rows = r.u64();
  a.info.train_days_digest = r.str();
  a.info.epochs_run = r.u32();
  a.info.best_validation_mape = r.f64();

  switch (a.algorithm) {
    case Algorithm::Persistence: break;
    case Algorithm::RandomForest: a.payload = get_forest(r); break;
    case Algorithm::Mlp: {
      MlpModel m;
      for (int& h : m.params.hidden) h = r.i32();
      m.params.l2 = r.f64();
      m.params.batch_size = r.i32();
      m.params.max_epochs = r.i32();
      m.params.patience = r.i32();
      m.params.adam = get_adam(r);
      m.standardizer = get_standardizer(r);
      m.target_scale = r.f64();
      m.net = get_params(r);
      a.payload = std::move(m);
      break;
    }
    case Algorithm::Lstm: {
      LstmModel m;
      m.params.lookback = r.i32();
      m.params.hidden = r.i32();
      for (int& d : m.params.dense) d = r.i32();
      m.params.l2 = r.f64();
      m.params.batch_size = r.i32();
      m.params.max_epochs = r.i32();
      m.params.patience = r.i32();
      m.params.adam = get_adam(r);
      m.standardizer = get_standardizer(r);
      m.target_scale = r.f64();
      m.net = get_params(r);
      a.payload = std::move(m);
      break;
    }
  }
  if (!r.done()) throw ArtifactFormatError("trailing bytes in model artifact payload");
  return a;
}

void save_model(const ModelArtifact& a, std::ostream& out) {
  const std::string bytes = serialize_model(a);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing model artifact");
}

ModelArtifact load_model(std::istream& in) {
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return deserialize_model(bytes);
}

void save_model(const ModelArtifact& a, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  save_model(a, out);
}

ModelArtifact load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return load_model(in);
}

}  // namespace tollcast::models
