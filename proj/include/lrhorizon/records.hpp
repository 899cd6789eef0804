#pragma once

// Sweep-run data model: one RunRecord per training run, grouped into
// per-(model, horizon) sweeps for curve fitting.
//
// Units are raw counts everywhere: token_horizon and n_params are absolute
// numbers of tokens / trainable parameters (350e6, not "350"). The scaling-law
// fitters convert to reference scales (1e9) internally. n_params means total
// trainable parameters, so users must supply counts consistent with however
// they label their models.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lrhorizon {

enum class RunStatus { completed, diverged };
enum class Parametrization { standard, muP };

std::string to_string(RunStatus s);
std::string to_string(Parametrization p);
RunStatus status_from_string(const std::string& s);
Parametrization parametrization_from_string(const std::string& s);

struct RunRecord {
    std::string model_name;
    double n_params = 0;              // total trainable parameters
    std::optional<int> n_layers;
    double batch_size_tokens = 0;     // tokens per optimization step
    double token_horizon = 0;         // total training tokens D
    double max_lr = 0;                // peak LR of the schedule
    std::optional<double> final_val_loss; // nats; may be absent only when diverged
    int seed = 0;
    RunStatus status = RunStatus::completed;
    Parametrization parametrization = Parametrization::standard;
    std::optional<double> unique_tokens;
    std::optional<std::string> architecture;

    bool operator==(const RunRecord&) const = default;
};

/// Throws ValidationError naming the offending field. `where` is prepended
/// to messages (e.g. "row 3").
void validate(const RunRecord& rec, const std::string& where = {});

struct GroupKey {
    std::string model_name;
    double n_params = 0;
    double batch_size_tokens = 0;
    double token_horizon = 0;
    Parametrization parametrization = Parametrization::standard;

    bool operator==(const GroupKey&) const = default;
    bool operator<(const GroupKey& o) const;
    std::string label() const; // e.g. "350m[bs=524288,D=1e+11]"
};

struct LrLossPoint {
    double lr = 0;
    double loss = 0;
};

/// One loss-vs-LR sweep at a fixed (model, batch size, horizon) cell.
/// Points come from completed runs only; seed replicates at the same LR are
/// averaged, so LRs are distinct and sorted ascending.
struct SweepGroup {
    GroupKey key;
    std::vector<LrLossPoint> points;
    int n_runs = 0; // completed runs folded into `points`

    bool fittable() const { return points.size() >= 3; }
};

struct IngestStats {
    std::size_t accepted = 0;  // valid completed rows
    std::size_t diverged = 0;  // valid diverged rows (retained, never fitted)
    std::size_t rejected = 0;  // invalid rows dropped (lenient mode only)
    std::vector<std::string> warnings;
};

struct IngestResult {
    std::vector<RunRecord> records;
    IngestStats stats;
};

enum class RecordFormat { jsonl, csv };

/// Reads and validates records. In strict mode (default) any malformed or
/// invalid row raises ValidationError naming the row and field; with
/// strict=false such rows are dropped and counted in stats.rejected.
IngestResult ingest(const std::filesystem::path& path, RecordFormat format,
                    bool strict = true);
IngestResult ingest(std::istream& in, RecordFormat format, bool strict = true);

void write_jsonl(std::ostream& out, const std::vector<RunRecord>& records);
void write_csv(std::ostream& out, const std::vector<RunRecord>& records);
std::string to_jsonl(const std::vector<RunRecord>& records);

/// CSV column order (header required on read, emitted on write):
/// model_name,n_params,n_layers,batch_size_tokens,token_horizon,max_lr,
/// final_val_loss,seed,status,parametrization,unique_tokens,architecture
extern const char* const kCsvHeader;

/// Deterministic grouping of completed runs by GroupKey, sorted by
/// (n_params, token_horizon, ...). Groups with fewer than 3 distinct LRs are
/// emitted but report fittable() == false.
std::vector<SweepGroup> group(const std::vector<RunRecord>& records);

/// Total order used wherever record lists must be canonicalized (bootstrap
/// resampling indexes records in this order).
void sort_canonical(std::vector<RunRecord>& records);

} // namespace lrhorizon
