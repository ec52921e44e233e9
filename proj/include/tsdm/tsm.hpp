#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "tsdm/material.hpp"
#include "tsdm/solver.hpp"

namespace tsdm {

enum class ExchangeMode { in_memory, file };

struct TsmConfig {
  int expansion_order = 1;
  std::size_t exchange_interval = 1000;  // K, steps between records
  ExchangeMode exchange_mode = ExchangeMode::in_memory;
  std::filesystem::path exchange_path;  // file mode only
  double xi_second_moment = 0.01;
  DamageSensitivityLaw law = DamageSensitivityLaw::exact_derivative;

  void validate() const;
};

/// Order-0 fields at one Gauss-point grid, consumed by the order-1 run.
struct ExchangeRecord {
  std::uint64_t step = 0;
  double time = 0.0;
  std::vector<Voigt> eps0;
  std::vector<double> d0;

  friend bool operator==(const ExchangeRecord&, const ExchangeRecord&) = default;
};

struct ExchangeHeader {
  std::uint32_t version = 1;
  std::uint64_t gp_count = 0;
  std::uint64_t interval = 1;
};

/// Binary little-endian layout: "TSMX", u32 version, u64 gp_count, u64 K,
/// then per record u64 step, f64 time, gp_count * (6 strain + 1 damage) f64,
/// then a u64 FNV-1a checksum of every preceding byte.
inline constexpr std::uint32_t kExchangeVersion = 1;
inline constexpr std::size_t kExchangeHeaderBytes = 4 + 4 + 8 + 8;

std::size_t exchange_record_bytes(std::uint64_t gp_count);

class ExchangeWriter {
 public:
  ExchangeWriter(const std::filesystem::path& path, std::uint64_t gp_count,
                 std::uint64_t interval);
  ~ExchangeWriter();
  ExchangeWriter(const ExchangeWriter&) = delete;
  ExchangeWriter& operator=(const ExchangeWriter&) = delete;

  void append(const ExchangeRecord& record);
  /// Writes the checksum and closes the file.
  void close();
  std::size_t records_written() const { return count_; }

 private:
  void put(const void* data, std::size_t n);

  std::filesystem::path path_;
  std::ofstream out_;
  std::uint64_t gp_count_;
  std::uint64_t hash_;
  std::size_t count_ = 0;
  std::vector<unsigned char> buffer_;
  bool closed_ = false;
};

/// Streams records from an exchange file. The constructor reads the whole
/// file once to check the header, the size and the checksum, so damaged
/// files are rejected before any record is handed out.
class ExchangeReader {
 public:
  explicit ExchangeReader(const std::filesystem::path& path);

  const ExchangeHeader& header() const { return header_; }
  std::size_t record_count() const { return count_; }
  /// Next record in file order; throws IoError past the end.
  ExchangeRecord next();

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  ExchangeHeader header_;
  std::size_t count_ = 0;
  std::size_t read_ = 0;
  std::vector<unsigned char> buffer_;
};

void write_exchange(const std::vector<ExchangeRecord>& records, std::uint64_t interval,
                    const std::filesystem::path& path);
std::vector<ExchangeRecord> read_exchange(const std::filesystem::path& path,
                                          ExchangeHeader* header = nullptr);

/// Where the order-1 run gets its order-0 fields from. Requests must have
/// nondecreasing record indices.
class Order0Source {
 public:
  virtual ~Order0Source() = default;
  virtual std::uint64_t gp_count() const = 0;
  virtual std::uint64_t interval() const = 0;
  virtual std::size_t record_count() const = 0;
  virtual const ExchangeRecord& record(std::size_t index) = 0;
};

class MemorySource final : public Order0Source {
 public:
  MemorySource(const std::vector<ExchangeRecord>& records, std::uint64_t gp_count,
               std::uint64_t interval);
  std::uint64_t gp_count() const override { return gp_count_; }
  std::uint64_t interval() const override { return interval_; }
  std::size_t record_count() const override { return records_->size(); }
  const ExchangeRecord& record(std::size_t index) override;

 private:
  const std::vector<ExchangeRecord>* records_;
  std::uint64_t gp_count_;
  std::uint64_t interval_;
};

class FileSource final : public Order0Source {
 public:
  explicit FileSource(const std::filesystem::path& path);
  std::uint64_t gp_count() const override { return reader_.header().gp_count; }
  std::uint64_t interval() const override { return reader_.header().interval; }
  std::size_t record_count() const override { return reader_.record_count(); }
  const ExchangeRecord& record(std::size_t index) override;

 private:
  ExchangeReader reader_;
  // The two most recently read records; an order-1 step needs at most two.
  ExchangeRecord slot_[2];
  std::size_t slot_index_[2];
  std::size_t next_index_ = 0;
};

/// Order-1 material update driven by held order-0 records: step m uses the
/// record of m / K (integer division).
class Order1Constitutive final : public Constitutive {
 public:
  Order1Constitutive(const MaterialParams& params, Order0Source& source,
                     DamageSensitivityLaw law, Execution exec);
  void initialize(std::span<const Voigt> eps1, GaussFields& fields) override;
  void advance(std::size_t step_new, double dt, std::span<const Voigt> eps1_new,
               GaussFields& fields) override;

 private:
  Matrix6 stiffness_;
  double eta_;
  Order0Source* source_;
  DamageSensitivityLaw law_;
  Execution exec_;
};

struct TsmTiming {
  double order0_s = 0.0;
  double order1_s = 0.0;
  double post_s = 0.0;
  double total_s = 0.0;
};

/// history1 holds u1, eps1, d1, sigma1 and the F1 series.
struct TsmSolution {
  History history0;
  History history1;
  TsmTiming timing;
};

/// run_deterministic at xi = 0 that also emits a record every K steps,
/// starting at step 0, to whichever sinks are given.
History run_order0(const Problem& problem, double dt, const OutputRequest& outputs,
                   std::size_t interval, std::vector<ExchangeRecord>* memory,
                   ExchangeWriter* file, Execution exec = Execution::serial);

/// Throws ValidationError before stepping if the source does not match the
/// mesh, the interval, or the time span.
History run_order1(const Problem& problem, Order0Source& source, double dt,
                   const OutputRequest& outputs,
                   DamageSensitivityLaw law = DamageSensitivityLaw::exact_derivative,
                   Execution exec = Execution::serial);

/// Order 0 to completion, then order 1.
TsmSolution run_tsm(const Problem& problem, const TsmConfig& config, double dt,
                    const OutputRequest& outputs, Execution exec = Execution::serial);

// --- UQ --------------------------------------------------------------------

struct UqSnapshot {
  std::size_t step = 0;
  double time = 0.0;
  std::vector<double> mean_d, std_d, mean_f, std_f;  // per Gauss point
  std::vector<Voigt> mean_sigma, std_sigma;          // componentwise
};

struct UqForceSeries {
  std::string node_set;
  std::vector<double> time;
  std::vector<Vec3> mean, std;
};

struct UqSummary {
  std::vector<UqSnapshot> snapshots;
  std::vector<UqForceSeries> forces;

  const UqForceSeries& force(const std::string& node_set) const;
};

/// Expectations are the order-0 fields; every Std is sqrt(<xi^2>) times the
/// magnitude of the first-order term, with f1 = -exp(-d0) d1.
UqSummary uq_summary(const TsmSolution& solution, double xi_second_moment);

}  // namespace tsdm
