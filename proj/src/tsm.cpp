#include "tsdm/tsm.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>

#include "tsdm/errors.hpp"

namespace tsdm {

static_assert(std::endian::native == std::endian::little,
              "exchange files are written in host byte order, which must be little-endian");

namespace {

constexpr char kMagic[4] = {'T', 'S', 'M', 'X'};
constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;
constexpr std::size_t kNoRecord = std::numeric_limits<std::size_t>::max();

std::uint64_t fnv1a(std::uint64_t h, const unsigned char* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

template <class T>
void store(unsigned char*& p, T v) {
  std::memcpy(p, &v, sizeof v);
  p += sizeof v;
}

template <class T>
T load(const unsigned char*& p) {
  T v;
  std::memcpy(&v, p, sizeof v);
  p += sizeof v;
  return v;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void TsmConfig::validate() const {
  if (expansion_order != 1)
    throw ValidationError("expansion order " + std::to_string(expansion_order) +
                          " is not supported; only p = 1 is implemented");
  if (exchange_interval < 1) throw ValidationError("exchange interval K must be at least 1");
  if (exchange_mode == ExchangeMode::file && exchange_path.empty())
    throw ValidationError("file exchange mode needs an exchange path");
  if (!(xi_second_moment >= 0.0) || !(xi_second_moment < 1.0))
    throw ValidationError("xi second moment must lie in [0, 1)");
}

std::size_t exchange_record_bytes(std::uint64_t gp_count) {
  return 8 + 8 + static_cast<std::size_t>(gp_count) * 7 * 8;
}

// --- Writer ----------------------------------------------------------------

ExchangeWriter::ExchangeWriter(const std::filesystem::path& path, std::uint64_t gp_count,
                               std::uint64_t interval)
    : path_(path), gp_count_(gp_count), hash_(kFnvOffset) {
  if (interval < 1) throw ValidationError("exchange interval K must be at least 1");
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot open exchange file '" + path.string() + "' for writing");
  unsigned char head[kExchangeHeaderBytes];
  unsigned char* p = head;
  std::memcpy(p, kMagic, 4);
  p += 4;
  store<std::uint32_t>(p, kExchangeVersion);
  store<std::uint64_t>(p, gp_count);
  store<std::uint64_t>(p, interval);
  put(head, sizeof head);
  buffer_.resize(exchange_record_bytes(gp_count));
}

ExchangeWriter::~ExchangeWriter() {
  if (!closed_) {
    try {
      close();
    } catch (...) {
    }
  }
}

void ExchangeWriter::put(const void* data, std::size_t n) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  hash_ = fnv1a(hash_, bytes, n);
  out_.write(reinterpret_cast<const char*>(bytes), static_cast<std::streamsize>(n));
  if (!out_) throw IoError("write to exchange file '" + path_.string() + "' failed");
}

void ExchangeWriter::append(const ExchangeRecord& r) {
  if (closed_) throw IoError("exchange file '" + path_.string() + "' is already closed");
  if (r.eps0.size() != gp_count_ || r.d0.size() != gp_count_)
    throw ValidationError("exchange record has " + std::to_string(r.d0.size()) +
                          " Gauss points, expected " + std::to_string(gp_count_));
  unsigned char* p = buffer_.data();
  store<std::uint64_t>(p, r.step);
  store<double>(p, r.time);
  for (std::size_t gp = 0; gp < gp_count_; ++gp) {
    std::memcpy(p, r.eps0[gp].data(), 6 * sizeof(double));
    p += 6 * sizeof(double);
    store<double>(p, r.d0[gp]);
  }
  put(buffer_.data(), buffer_.size());
  ++count_;
}

void ExchangeWriter::close() {
  if (closed_) return;
  closed_ = true;
  unsigned char tail[8];
  unsigned char* p = tail;
  store<std::uint64_t>(p, hash_);
  out_.write(reinterpret_cast<const char*>(tail), sizeof tail);
  out_.close();
  if (!out_) throw IoError("closing exchange file '" + path_.string() + "' failed");
}

// --- Reader ----------------------------------------------------------------

ExchangeReader::ExchangeReader(const std::filesystem::path& path) : path_(path) {
  const std::string name = "exchange file '" + path.string() + "'";
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + name + ": " + ec.message());
  in_.open(path, std::ios::binary);
  if (!in_) throw IoError("cannot open " + name);
  if (size < kExchangeHeaderBytes + 8) throw IoError(name + " is truncated (no complete header)");

  unsigned char head[kExchangeHeaderBytes];
  in_.read(reinterpret_cast<char*>(head), sizeof head);
  if (!in_) throw IoError("cannot read the header of " + name);
  if (std::memcmp(head, kMagic, 4) != 0) throw IoError(name + " has a bad magic number");
  const unsigned char* p = head + 4;
  header_.version = load<std::uint32_t>(p);
  header_.gp_count = load<std::uint64_t>(p);
  header_.interval = load<std::uint64_t>(p);
  if (header_.version != kExchangeVersion)
    throw IoError(name + " has unsupported version " + std::to_string(header_.version));
  if (header_.interval < 1) throw IoError(name + " declares an exchange interval of 0");

  const std::size_t rec = exchange_record_bytes(header_.gp_count);
  const std::size_t body = size - kExchangeHeaderBytes - 8;
  if (body % rec != 0)
    throw IoError(name + " is truncated: " + std::to_string(body) +
                  " record bytes is not a multiple of the record size " + std::to_string(rec));
  count_ = body / rec;

  std::uint64_t h = fnv1a(kFnvOffset, head, sizeof head);
  std::vector<unsigned char> chunk(1 << 20);
  std::size_t left = body;
  while (left > 0) {
    const std::size_t n = std::min(left, chunk.size());
    in_.read(reinterpret_cast<char*>(chunk.data()), static_cast<std::streamsize>(n));
    if (!in_) throw IoError("short read in " + name);
    h = fnv1a(h, chunk.data(), n);
    left -= n;
  }
  unsigned char tail[8];
  in_.read(reinterpret_cast<char*>(tail), sizeof tail);
  if (!in_) throw IoError("short read in " + name);
  const unsigned char* t = tail;
  if (load<std::uint64_t>(t) != h) throw IoError(name + " fails its checksum");

  in_.seekg(static_cast<std::streamoff>(kExchangeHeaderBytes));
  buffer_.resize(rec);
}

ExchangeRecord ExchangeReader::next() {
  if (read_ >= count_)
    throw IoError("exchange file '" + path_.string() + "' has only " + std::to_string(count_) +
                  " records");
  in_.read(reinterpret_cast<char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()));
  if (!in_) throw IoError("short read in exchange file '" + path_.string() + "'");
  const unsigned char* p = buffer_.data();
  ExchangeRecord r;
  r.step = load<std::uint64_t>(p);
  r.time = load<double>(p);
  r.eps0.resize(header_.gp_count);
  r.d0.resize(header_.gp_count);
  for (std::size_t gp = 0; gp < header_.gp_count; ++gp) {
    std::memcpy(r.eps0[gp].data(), p, 6 * sizeof(double));
    p += 6 * sizeof(double);
    r.d0[gp] = load<double>(p);
  }
  if (r.step != read_ * header_.interval)
    throw IoError("exchange file '" + path_.string() + "' record " + std::to_string(read_) +
                  " is for step " + std::to_string(r.step) + ", expected " +
                  std::to_string(read_ * header_.interval));
  ++read_;
  return r;
}

void write_exchange(const std::vector<ExchangeRecord>& records, std::uint64_t interval,
                    const std::filesystem::path& path) {
  const std::uint64_t gp = records.empty() ? 0 : records.front().d0.size();
  ExchangeWriter w(path, gp, interval);
  for (const auto& r : records) w.append(r);
  w.close();
}

std::vector<ExchangeRecord> read_exchange(const std::filesystem::path& path,
                                          ExchangeHeader* header) {
  ExchangeReader reader(path);
  if (header) *header = reader.header();
  std::vector<ExchangeRecord> out;
  out.reserve(reader.record_count());
  for (std::size_t i = 0; i < reader.record_count(); ++i) out.push_back(reader.next());
  return out;
}

// --- Sources ---------------------------------------------------------------

MemorySource::MemorySource(const std::vector<ExchangeRecord>& records, std::uint64_t gp_count,
                           std::uint64_t interval)
    : records_(&records), gp_count_(gp_count), interval_(interval) {
  if (interval < 1) throw ValidationError("exchange interval K must be at least 1");
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].step != i * interval)
      throw ValidationError("in-memory record " + std::to_string(i) + " is for step " +
                            std::to_string(records[i].step));
    if (records[i].d0.size() != gp_count || records[i].eps0.size() != gp_count)
      throw ValidationError("in-memory record " + std::to_string(i) +
                            " has the wrong Gauss-point count");
  }
}

const ExchangeRecord& MemorySource::record(std::size_t index) {
  if (index >= records_->size())
    throw ValidationError("order-0 source has no record " + std::to_string(index));
  return (*records_)[index];
}

FileSource::FileSource(const std::filesystem::path& path)
    : reader_(path), slot_index_{kNoRecord, kNoRecord} {}

const ExchangeRecord& FileSource::record(std::size_t index) {
  for (int s = 0; s < 2; ++s)
    if (slot_index_[s] == index) return slot_[s];
  if (index < next_index_)
    throw IoError("exchange file records must be consumed in order (asked for " +
                  std::to_string(index) + " after " + std::to_string(next_index_ - 1) + ")");
  while (next_index_ < index) {
    reader_.next();
    ++next_index_;
  }
  // Evict the older slot; an unused slot counts as oldest.
  int victim = 0;
  if (slot_index_[0] != kNoRecord &&
      (slot_index_[1] == kNoRecord || slot_index_[1] < slot_index_[0]))
    victim = 1;
  slot_[victim] = reader_.next();
  slot_index_[victim] = index;
  ++next_index_;
  return slot_[victim];
}

// --- Order-1 constitutive --------------------------------------------------

Order1Constitutive::Order1Constitutive(const MaterialParams& params, Order0Source& source,
                                       DamageSensitivityLaw law, Execution exec)
    : stiffness_(stiffness_voigt(params.lambda, params.mu)),
      eta_(params.eta),
      source_(&source),
      law_(law),
      exec_(exec) {}

void Order1Constitutive::initialize(std::span<const Voigt> eps1, GaussFields& fields) {
  const ExchangeRecord& r = source_->record(0);
  for (std::size_t gp = 0; gp < eps1.size(); ++gp) {
    fields.eps[gp] = eps1[gp];
    fields.sigma[gp] = stress_order1(r.d0[gp], fields.d[gp], r.eps0[gp], eps1[gp], stiffness_);
  }
}

void Order1Constitutive::advance(std::size_t step_new, double dt, std::span<const Voigt> eps1_new,
                                 GaussFields& fields) {
  const std::size_t k = source_->interval();
  const ExchangeRecord& prev = source_->record((step_new - 1) / k);
  const ExchangeRecord& cur = source_->record(step_new / k);
  const long n = static_cast<long>(eps1_new.size());
  auto body = [&](std::size_t gp) {
    const double d1 = update_damage_order1(prev.d0[gp], fields.d[gp], prev.eps0[gp],
                                           fields.eps[gp], stiffness_, eta_, dt, law_);
    fields.d[gp] = d1;
    fields.eps[gp] = eps1_new[gp];
    fields.sigma[gp] = stress_order1(cur.d0[gp], d1, cur.eps0[gp], eps1_new[gp], stiffness_);
  };
  if (exec_ == Execution::openmp) {
#pragma omp parallel for schedule(static)
    for (long gp = 0; gp < n; ++gp) body(static_cast<std::size_t>(gp));
  } else {
    for (long gp = 0; gp < n; ++gp) body(static_cast<std::size_t>(gp));
  }
}

// --- Drivers ---------------------------------------------------------------

History run_order0(const Problem& problem, double dt, const OutputRequest& outputs,
                   std::size_t interval, std::vector<ExchangeRecord>* memory,
                   ExchangeWriter* file, Execution exec) {
  if (interval < 1) throw ValidationError("exchange interval K must be at least 1");
  auto emit = [&](const DynamicState& s) {
    if (s.step % interval != 0) return;
    ExchangeRecord r{s.step, s.time, s.gauss.eps, s.gauss.d};
    if (file) file->append(r);
    if (memory) memory->push_back(std::move(r));
  };
  return run_deterministic(problem, 0.0, dt, outputs, exec, emit);
}

History run_order1(const Problem& problem, Order0Source& source, double dt,
                   const OutputRequest& outputs, DamageSensitivityLaw law, Execution exec) {
  problem.validate();
  const std::size_t steps = step_count(problem.loads.total_time, dt);
  if (source.gp_count() != problem.mesh.gauss_count())
    throw ValidationError("order-0 source has " + std::to_string(source.gp_count()) +
                          " Gauss points but the mesh has " +
                          std::to_string(problem.mesh.gauss_count()));
  const std::size_t needed = steps / source.interval() + 1;
  if (source.record_count() < needed)
    throw ValidationError("order-0 source has " + std::to_string(source.record_count()) +
                          " records but " + std::to_string(steps) + " steps with K = " +
                          std::to_string(source.interval()) + " need " +
                          std::to_string(needed));

  ExplicitDynamics dyn(problem.mesh, problem.loads, problem.material.rho, exec,
                       problem.mass_damping);
  Order1Constitutive material(problem.material, source, law, exec);
  HistoryRecorder recorder(outputs, dt, steps, dyn.reaction_sets());
  const auto mode = BoundaryMode::homogeneous;

  DynamicState state = dyn.initial_state(material, dt, mode);
  recorder.observe(state, dyn, mode);
  for (std::size_t n = 0; n < steps; ++n) {
    dyn.step(state, dt, material, mode);
    recorder.observe(state, dyn, mode);
  }
  return recorder.finish();
}

TsmSolution run_tsm(const Problem& problem, const TsmConfig& config, double dt,
                    const OutputRequest& outputs, Execution exec) {
  config.validate();
  const std::size_t k = config.exchange_interval;
  const std::uint64_t gp = problem.mesh.gauss_count();
  TsmSolution sol;
  const auto t0 = std::chrono::steady_clock::now();

  if (config.exchange_mode == ExchangeMode::in_memory) {
    std::vector<ExchangeRecord> records;
    sol.history0 = run_order0(problem, dt, outputs, k, &records, nullptr, exec);
    sol.timing.order0_s = seconds_since(t0);
    const auto t1 = std::chrono::steady_clock::now();
    MemorySource source(records, gp, k);
    sol.history1 = run_order1(problem, source, dt, outputs, config.law, exec);
    sol.timing.order1_s = seconds_since(t1);
  } else {
    {
      ExchangeWriter writer(config.exchange_path, gp, k);
      sol.history0 = run_order0(problem, dt, outputs, k, nullptr, &writer, exec);
      writer.close();
    }
    sol.timing.order0_s = seconds_since(t0);
    const auto t1 = std::chrono::steady_clock::now();
    FileSource source(config.exchange_path);
    if (source.interval() != k)
      throw ValidationError("exchange file interval " + std::to_string(source.interval()) +
                            " differs from the configured K = " + std::to_string(k));
    sol.history1 = run_order1(problem, source, dt, outputs, config.law, exec);
    sol.timing.order1_s = seconds_since(t1);
  }
  sol.timing.total_s = seconds_since(t0);
  return sol;
}

// --- UQ --------------------------------------------------------------------

const UqForceSeries& UqSummary::force(const std::string& node_set) const {
  for (const auto& f : forces)
    if (f.node_set == node_set) return f;
  throw ValidationError("summary has no force series for set '" + node_set + "'");
}

UqSummary uq_summary(const TsmSolution& sol, double xi_second_moment) {
  if (!(xi_second_moment >= 0.0)) throw ValidationError("xi second moment must be non-negative");
  const double s = std::sqrt(xi_second_moment);
  const History& h0 = sol.history0;
  const History& h1 = sol.history1;
  if (h0.snapshots.size() != h1.snapshots.size())
    throw ValidationError("order-0 and order-1 histories have different snapshot grids");

  UqSummary out;
  for (std::size_t i = 0; i < h0.snapshots.size(); ++i) {
    const Snapshot& a = h0.snapshots[i];
    const Snapshot& b = h1.snapshots[i];
    if (a.step != b.step || a.d.size() != b.d.size())
      throw ValidationError("order-0 and order-1 snapshot " + std::to_string(i) + " differ");
    UqSnapshot u;
    u.step = a.step;
    u.time = a.time;
    const std::size_t n = a.d.size();
    u.mean_d = a.d;
    u.std_d.resize(n);
    u.mean_f.resize(n);
    u.std_f.resize(n);
    u.mean_sigma = a.sigma;
    u.std_sigma.resize(n);
    for (std::size_t gp = 0; gp < n; ++gp) {
      const double f0 = damage_function(a.d[gp]);
      u.std_d[gp] = s * std::abs(b.d[gp]);
      u.mean_f[gp] = f0;
      u.std_f[gp] = s * std::abs(-f0 * b.d[gp]);
      for (std::size_t c = 0; c < 6; ++c) u.std_sigma[gp][c] = s * std::abs(b.sigma[gp][c]);
    }
    out.snapshots.push_back(std::move(u));
  }
  for (const auto& r0 : h0.reactions) {
    const ReactionSeries& r1 = h1.reaction(r0.node_set);
    if (r1.time.size() != r0.time.size())
      throw ValidationError("reaction series for '" + r0.node_set + "' differ in length");
    UqForceSeries f{r0.node_set, r0.time, r0.force, {}};
    f.std.resize(r0.force.size());
    for (std::size_t i = 0; i < r0.force.size(); ++i)
      for (std::size_t c = 0; c < 3; ++c) f.std[i][c] = s * std::abs(r1.force[i][c]);
    out.forces.push_back(std::move(f));
  }
  return out;
}

}  // namespace tsdm
