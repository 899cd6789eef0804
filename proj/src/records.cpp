#include "lrhorizon/records.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "lrhorizon/errors.hpp"
#include "lrhorizon/serialize.hpp"

namespace lrhorizon {

using nlohmann::json;

const char* const kCsvHeader =
    "model_name,n_params,n_layers,batch_size_tokens,token_horizon,max_lr,"
    "final_val_loss,seed,status,parametrization,unique_tokens,architecture";

std::string to_string(RunStatus s) {
    return s == RunStatus::completed ? "completed" : "diverged";
}

std::string to_string(Parametrization p) {
    return p == Parametrization::standard ? "standard" : "muP";
}

RunStatus status_from_string(const std::string& s) {
    if (s == "completed") return RunStatus::completed;
    if (s == "diverged") return RunStatus::diverged;
    throw ValidationError("status must be 'completed' or 'diverged', got '" + s + "'");
}

Parametrization parametrization_from_string(const std::string& s) {
    if (s == "standard") return Parametrization::standard;
    if (s == "muP" || s == "mup") return Parametrization::muP;
    throw ValidationError("parametrization must be 'standard' or 'muP', got '" + s + "'");
}

namespace {

[[noreturn]] void fail_field(const std::string& where, const std::string& field,
                             const std::string& why) {
    std::string prefix = where.empty() ? "" : where + ": ";
    throw ValidationError(prefix + "field '" + field + "' " + why);
}

void require_positive(double v, const char* field, const std::string& where) {
    if (!(v > 0) || !std::isfinite(v)) fail_field(where, field, "must be a positive finite number");
}

} // namespace

void validate(const RunRecord& rec, const std::string& where) {
    if (rec.model_name.empty()) fail_field(where, "model_name", "must be non-empty");
    require_positive(rec.n_params, "n_params", where);
    require_positive(rec.batch_size_tokens, "batch_size_tokens", where);
    require_positive(rec.token_horizon, "token_horizon", where);
    require_positive(rec.max_lr, "max_lr", where);
    if (rec.n_layers && *rec.n_layers <= 0) fail_field(where, "n_layers", "must be positive");
    if (rec.unique_tokens) require_positive(*rec.unique_tokens, "unique_tokens", where);
    if (rec.status == RunStatus::completed) {
        if (!rec.final_val_loss)
            fail_field(where, "final_val_loss", "is required for completed runs");
        require_positive(*rec.final_val_loss, "final_val_loss", where);
    } else if (rec.final_val_loss) {
        // a diverged run may report its (meaningless) loss; it still must parse
        require_positive(*rec.final_val_loss, "final_val_loss", where);
    }
}

bool GroupKey::operator<(const GroupKey& o) const {
    return std::tie(n_params, token_horizon, model_name, batch_size_tokens, parametrization) <
           std::tie(o.n_params, o.token_horizon, o.model_name, o.batch_size_tokens, o.parametrization);
}

std::string GroupKey::label() const {
    std::ostringstream os;
    os << model_name << "[bs=" << batch_size_tokens << ",D=" << token_horizon;
    if (parametrization == Parametrization::muP) os << ",muP";
    os << "]";
    return os.str();
}

// ---------------------------------------------------------------------------
// JSONL

namespace {

RunRecord parse_json_row(const json& j, const std::string& where,
                         std::set<std::string>* unknown_fields) {
    static const std::set<std::string> known = {
        "model_name", "n_params", "n_layers", "batch_size_tokens", "token_horizon",
        "max_lr", "final_val_loss", "seed", "status", "parametrization",
        "unique_tokens", "architecture"};
    if (!j.is_object()) throw ValidationError(where + ": record must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key()) && unknown_fields) unknown_fields->insert(it.key());
    }
    return record_from_json(j, where);
}

struct RowOutcome {
    std::optional<RunRecord> record;
    std::string error;
};

RowOutcome try_row(const std::function<RunRecord()>& parse) {
    RowOutcome out;
    try {
        out.record = parse();
    } catch (const Error& e) {
        out.error = e.what();
    } catch (const json::exception& e) {
        out.error = e.what();
    }
    return out;
}

IngestResult finish_ingest(std::vector<RowOutcome> rows, bool strict,
                           const std::set<std::string>& unknown_fields) {
    IngestResult result;
    for (const auto& field : unknown_fields)
        result.stats.warnings.push_back("ignoring unknown field '" + field + "'");
    for (auto& row : rows) {
        if (!row.record) {
            if (strict) throw ValidationError(row.error);
            result.stats.rejected++;
            result.stats.warnings.push_back("rejected: " + row.error);
            continue;
        }
        if (row.record->status == RunStatus::diverged)
            result.stats.diverged++;
        else
            result.stats.accepted++;
        result.records.push_back(std::move(*row.record));
    }
    if (result.records.empty() && result.stats.rejected == 0)
        result.stats.warnings.push_back("input contained no records");
    return result;
}

IngestResult ingest_jsonl(std::istream& in, bool strict) {
    std::vector<RowOutcome> rows;
    std::set<std::string> unknown;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::string where = "row " + std::to_string(line_no);
        rows.push_back(try_row([&] {
            json j = json::parse(line, nullptr, /*allow_exceptions=*/true);
            return parse_json_row(j, where, &unknown);
        }));
    }
    return finish_ingest(std::move(rows), strict, unknown);
}

// ---------------------------------------------------------------------------
// CSV — minimalist: comma-separated, no quoting (none of the fields need it).

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const char* field, const std::string& where) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        fail_field(where, field, "is not a number: '" + s + "'");
    }
}

int parse_int(const std::string& s, const char* field, const std::string& where) {
    double v = parse_double(s, field, where);
    if (v != std::floor(v)) fail_field(where, field, "must be an integer: '" + s + "'");
    return static_cast<int>(v);
}

IngestResult ingest_csv(std::istream& in, bool strict) {
    std::string header_line;
    if (!std::getline(in, header_line)) {
        IngestResult empty;
        empty.stats.warnings.push_back("input contained no records");
        return empty;
    }
    auto header = split_csv(header_line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* required : {"model_name", "n_params", "batch_size_tokens",
                                 "token_horizon", "max_lr"})
        if (!col.count(required))
            throw ValidationError(std::string("CSV header is missing column '") + required + "'");

    auto cell = [&](const std::vector<std::string>& fields, const char* name) -> std::string {
        auto it = col.find(name);
        if (it == col.end() || it->second >= fields.size()) return {};
        return fields[it->second];
    };

    std::vector<RowOutcome> rows;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
        std::string where = "row " + std::to_string(line_no);
        rows.push_back(try_row([&]() -> RunRecord {
            auto fields = split_csv(line);
            RunRecord rec;
            rec.model_name = cell(fields, "model_name");
            rec.n_params = parse_double(cell(fields, "n_params"), "n_params", where);
            if (auto s = cell(fields, "n_layers"); !s.empty())
                rec.n_layers = parse_int(s, "n_layers", where);
            rec.batch_size_tokens =
                parse_double(cell(fields, "batch_size_tokens"), "batch_size_tokens", where);
            rec.token_horizon =
                parse_double(cell(fields, "token_horizon"), "token_horizon", where);
            rec.max_lr = parse_double(cell(fields, "max_lr"), "max_lr", where);
            if (auto s = cell(fields, "final_val_loss"); !s.empty())
                rec.final_val_loss = parse_double(s, "final_val_loss", where);
            if (auto s = cell(fields, "seed"); !s.empty())
                rec.seed = parse_int(s, "seed", where);
            if (auto s = cell(fields, "status"); !s.empty())
                rec.status = status_from_string(s); // defaults to completed when absent
            if (auto s = cell(fields, "parametrization"); !s.empty())
                rec.parametrization = parametrization_from_string(s);
            if (auto s = cell(fields, "unique_tokens"); !s.empty())
                rec.unique_tokens = parse_double(s, "unique_tokens", where);
            if (auto s = cell(fields, "architecture"); !s.empty()) rec.architecture = s;
            validate(rec, where);
            return rec;
        }));
    }
    return finish_ingest(std::move(rows), strict, {});
}

} // namespace

IngestResult ingest(std::istream& in, RecordFormat format, bool strict) {
    return format == RecordFormat::jsonl ? ingest_jsonl(in, strict) : ingest_csv(in, strict);
}

IngestResult ingest(const std::filesystem::path& path, RecordFormat format, bool strict) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open input file: " + path.string());
    return ingest(in, format, strict);
}

void write_jsonl(std::ostream& out, const std::vector<RunRecord>& records) {
    for (const auto& rec : records) out << to_json(rec).dump() << "\n";
}

std::string to_jsonl(const std::vector<RunRecord>& records) {
    std::ostringstream os;
    write_jsonl(os, records);
    return os.str();
}

namespace {

std::string csv_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

void write_csv(std::ostream& out, const std::vector<RunRecord>& records) {
    out << kCsvHeader << "\n";
    for (const auto& rec : records) {
        out << rec.model_name << "," << csv_number(rec.n_params) << ","
            << (rec.n_layers ? std::to_string(*rec.n_layers) : "") << ","
            << csv_number(rec.batch_size_tokens) << "," << csv_number(rec.token_horizon)
            << "," << csv_number(rec.max_lr) << ","
            << (rec.final_val_loss ? csv_number(*rec.final_val_loss) : "") << ","
            << rec.seed << "," << to_string(rec.status) << ","
            << to_string(rec.parametrization) << ","
            << (rec.unique_tokens ? csv_number(*rec.unique_tokens) : "") << ","
            << (rec.architecture ? *rec.architecture : "") << "\n";
    }
}

// ---------------------------------------------------------------------------
// Grouping

std::vector<SweepGroup> group(const std::vector<RunRecord>& records) {
    // key -> lr -> losses (seed replicates averaged below)
    std::map<GroupKey, std::map<double, std::vector<double>>> cells;
    std::map<GroupKey, int> run_counts;
    for (const auto& rec : records) {
        if (rec.status != RunStatus::completed) continue; // diverged never enter fits
        GroupKey key{rec.model_name, rec.n_params, rec.batch_size_tokens,
                     rec.token_horizon, rec.parametrization};
        cells[key][rec.max_lr].push_back(*rec.final_val_loss);
        run_counts[key]++;
    }
    std::vector<SweepGroup> groups;
    groups.reserve(cells.size());
    for (auto& [key, by_lr] : cells) {
        SweepGroup g;
        g.key = key;
        g.n_runs = run_counts[key];
        for (auto& [lr, losses] : by_lr) {
            double sum = 0;
            for (double l : losses) sum += l;
            g.points.push_back({lr, sum / static_cast<double>(losses.size())});
        }
        groups.push_back(std::move(g));
    }
    return groups; // std::map iteration already sorted by GroupKey
}

void sort_canonical(std::vector<RunRecord>& records) {
    std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
        return std::tie(a.model_name, a.n_params, a.batch_size_tokens, a.parametrization,
                        a.token_horizon, a.max_lr, a.seed, a.status) <
               std::tie(b.model_name, b.n_params, b.batch_size_tokens, b.parametrization,
                        b.token_horizon, b.max_lr, b.seed, b.status);
    });
}

} // namespace lrhorizon
