#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "lrhorizon/errors.hpp"
#include "lrhorizon/records.hpp"
#include "lrhorizon/rng.hpp"

using namespace lrhorizon;

namespace {

RunRecord make_record(const std::string& model = "350m", double n_params = 350e6,
                      double d = 100e9, double lr = 3e-4, double loss = 2.92,
                      int seed = 0) {
    RunRecord rec;
    rec.model_name = model;
    rec.n_params = n_params;
    rec.batch_size_tokens = 524288;
    rec.token_horizon = d;
    rec.max_lr = lr;
    rec.final_val_loss = loss;
    rec.seed = seed;
    return rec;
}

std::vector<RunRecord> random_records(std::mt19937_64& eng, std::size_t n) {
    std::vector<RunRecord> recs;
    for (std::size_t i = 0; i < n; ++i) {
        auto rec = make_record("m" + std::to_string(rng::bounded(eng, 3)),
                               (1 + rng::bounded(eng, 4)) * 1e8,
                               (1 + rng::bounded(eng, 4)) * 25e9,
                               std::pow(10.0, -4 + rng::uniform01(eng)),
                               2.0 + rng::uniform01(eng),
                               static_cast<int>(rng::bounded(eng, 3)));
        if (rng::bounded(eng, 5) == 0) {
            rec.status = RunStatus::diverged;
            if (rng::bounded(eng, 2) == 0) rec.final_val_loss.reset();
        }
        if (rng::bounded(eng, 3) == 0) rec.n_layers = 24;
        if (rng::bounded(eng, 3) == 0) rec.architecture = "gpt3";
        if (rng::bounded(eng, 4) == 0) rec.unique_tokens = 25e9;
        if (rng::bounded(eng, 4) == 0) rec.parametrization = Parametrization::muP;
        recs.push_back(std::move(rec));
    }
    return recs;
}

} // namespace

TEST_CASE("jsonl ingest accepts, flags diverged, rejects bad rows") {
    std::istringstream in(R"({"model_name":"50m","n_params":5e7,"batch_size_tokens":524288,"token_horizon":8e11,"max_lr":3.2e-3,"status":"diverged"}
{"model_name":"50m","n_params":5e7,"batch_size_tokens":524288,"token_horizon":8e11,"max_lr":8e-4,"final_val_loss":2.81}
)");
    auto result = ingest(in, RecordFormat::jsonl);
    CHECK(result.records.size() == 2);
    CHECK(result.stats.accepted == 1);
    CHECK(result.stats.diverged == 1);
    CHECK(result.stats.rejected == 0);
    CHECK(result.records[0].status == RunStatus::diverged);
    CHECK(!result.records[0].final_val_loss.has_value());

    // diverged rows never reach sweep groups
    auto groups = group(result.records);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].points.size() == 1);
    CHECK(groups[0].points[0].lr == doctest::Approx(8e-4));
}

TEST_CASE("empty input yields empty list and a warning") {
    std::istringstream in("");
    auto result = ingest(in, RecordFormat::jsonl);
    CHECK(result.records.empty());
    REQUIRE(!result.stats.warnings.empty());
    CHECK(result.stats.warnings[0].find("no records") != std::string::npos);
}

TEST_CASE("non-positive max_lr is a validation error naming the field") {
    std::istringstream in(
        R"({"model_name":"50m","n_params":5e7,"batch_size_tokens":524288,"token_horizon":1e9,"max_lr":0,"final_val_loss":2.8})");
    CHECK_THROWS_WITH_AS(ingest(in, RecordFormat::jsonl),
                         doctest::Contains("max_lr"), ValidationError);
}

TEST_CASE("malformed row errors name the row index") {
    std::istringstream in(R"({"model_name":"50m","n_params":5e7,"batch_size_tokens":524288,"token_horizon":1e9,"max_lr":8e-4,"final_val_loss":2.8}
{"model_name":"50m","n_params":5e7)");
    try {
        ingest(in, RecordFormat::jsonl);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
}

TEST_CASE("lenient mode counts rejected rows instead of throwing") {
    std::istringstream in(R"({"model_name":"a","n_params":1e8,"batch_size_tokens":5e5,"token_horizon":1e9,"max_lr":-1,"final_val_loss":2.8}
{"model_name":"a","n_params":1e8,"batch_size_tokens":5e5,"token_horizon":1e9,"max_lr":1e-3,"final_val_loss":2.8}
)");
    auto result = ingest(in, RecordFormat::jsonl, /*strict=*/false);
    CHECK(result.records.size() == 1);
    CHECK(result.stats.accepted == 1);
    CHECK(result.stats.rejected == 1);
}

TEST_CASE("unknown jsonl fields are ignored with a warning") {
    std::istringstream in(
        R"({"model_name":"a","n_params":1e8,"batch_size_tokens":5e5,"token_horizon":1e9,"max_lr":1e-3,"final_val_loss":2.8,"gpu_hours":12})");
    auto result = ingest(in, RecordFormat::jsonl);
    CHECK(result.records.size() == 1);
    bool warned = false;
    for (const auto& w : result.stats.warnings)
        if (w.find("gpu_hours") != std::string::npos) warned = true;
    CHECK(warned);
}

TEST_CASE("csv ingest with status defaulting to completed") {
    std::istringstream in(
        "model_name,n_params,batch_size_tokens,token_horizon,max_lr,final_val_loss\n"
        "125m,1.25e8,524288,2.5e10,6e-4,2.95\n"
        "125m,1.25e8,524288,2.5e10,1.2e-3,2.93\n");
    auto result = ingest(in, RecordFormat::csv);
    REQUIRE(result.records.size() == 2);
    CHECK(result.records[0].status == RunStatus::completed);
    CHECK(result.records[1].max_lr == doctest::Approx(1.2e-3));
}

TEST_CASE("csv missing required column is an error") {
    std::istringstream in("model_name,n_params\na,1e8\n");
    CHECK_THROWS_AS(ingest(in, RecordFormat::csv), ValidationError);
}

TEST_CASE("csv rows report the offending field") {
    std::istringstream in(
        "model_name,n_params,batch_size_tokens,token_horizon,max_lr,final_val_loss\n"
        "125m,1.25e8,524288,banana,6e-4,2.95\n");
    CHECK_THROWS_WITH_AS(ingest(in, RecordFormat::csv),
                         doctest::Contains("token_horizon"), ValidationError);
}

TEST_CASE("jsonl and csv round trips are the identity on valid records") {
    auto eng = rng::make_engine({2024, 1});
    for (int trial = 0; trial < 20; ++trial) {
        auto recs = random_records(eng, 1 + rng::bounded(eng, 30));
        {
            std::ostringstream os;
            write_jsonl(os, recs);
            std::istringstream is(os.str());
            auto back = ingest(is, RecordFormat::jsonl);
            CHECK(back.records == recs);
        }
        {
            std::ostringstream os;
            write_csv(os, recs);
            std::istringstream is(os.str());
            auto back = ingest(is, RecordFormat::csv);
            CHECK(back.records == recs);
        }
    }
}

TEST_CASE("grouping is permutation invariant and keeps diverged runs out") {
    auto eng = rng::make_engine({2024, 2});
    for (int trial = 0; trial < 20; ++trial) {
        auto recs = random_records(eng, 40);
        auto groups_a = group(recs);
        auto shuffled = recs;
        std::shuffle(shuffled.begin(), shuffled.end(), eng);
        auto groups_b = group(shuffled);
        REQUIRE(groups_a.size() == groups_b.size());
        for (std::size_t i = 0; i < groups_a.size(); ++i) {
            CHECK(groups_a[i].key == groups_b[i].key);
            REQUIRE(groups_a[i].points.size() == groups_b[i].points.size());
            for (std::size_t j = 0; j < groups_a[i].points.size(); ++j) {
                CHECK(groups_a[i].points[j].lr == groups_b[i].points[j].lr);
                CHECK(groups_a[i].points[j].loss ==
                      doctest::Approx(groups_b[i].points[j].loss).epsilon(1e-15));
            }
        }
        // no diverged record's LR may appear with its horizon unless a
        // completed run shares it
        for (const auto& g : groups_a) {
            std::size_t completed_here = 0;
            for (const auto& r : recs)
                if (r.status == RunStatus::completed &&
                    GroupKey{r.model_name, r.n_params, r.batch_size_tokens, r.token_horizon,
                             r.parametrization} == g.key)
                    ++completed_here;
            CHECK(g.n_runs == static_cast<int>(completed_here));
        }
    }
}

TEST_CASE("seed replicates at the same LR are averaged") {
    std::vector<RunRecord> recs;
    double lrs[3] = {1.5e-4, 3e-4, 6e-4};
    for (int seed = 0; seed < 3; ++seed)
        for (int k = 0; k < 3; ++k)
            recs.push_back(make_record("350m", 350e6, 100e9, lrs[k], 2.9 + 0.01 * seed, seed));
    auto groups = group(recs);
    REQUIRE(groups.size() == 1);
    REQUIRE(groups[0].points.size() == 3);
    CHECK(groups[0].n_runs == 9);
    for (const auto& p : groups[0].points) CHECK(p.loss == doctest::Approx(2.91));
}

TEST_CASE("a single record makes an unfittable group") {
    auto groups = group({make_record()});
    REQUIRE(groups.size() == 1);
    CHECK(!groups[0].fittable());
}

TEST_CASE("differing batch sizes split groups") {
    auto a = make_record();
    auto b = make_record();
    b.batch_size_tokens = 2 * a.batch_size_tokens;
    auto groups = group({a, b});
    CHECK(groups.size() == 2);
}

TEST_CASE("groups are sorted by model size then horizon") {
    std::vector<RunRecord> recs = {
        make_record("1.3b", 1.3e9, 25e9), make_record("350m", 350e6, 50e9),
        make_record("350m", 350e6, 25e9), make_record("1.3b", 1.3e9, 50e9)};
    auto groups = group(recs);
    REQUIRE(groups.size() == 4);
    CHECK(groups[0].key.n_params == 350e6);
    CHECK(groups[0].key.token_horizon == 25e9);
    CHECK(groups[1].key.token_horizon == 50e9);
    CHECK(groups[2].key.n_params == 1.3e9);
}

TEST_CASE("completed run without a loss is invalid") {
    auto rec = make_record();
    rec.final_val_loss.reset();
    CHECK_THROWS_WITH_AS(validate(rec), doctest::Contains("final_val_loss"), ValidationError);
}
