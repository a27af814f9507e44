#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "oracles.h"
#include "ssi/audio/wav_io.h"
#include "ssi/common/error.h"
#include "ssi/degrade/toy_corpus.h"
#include "ssi/eval/corpus.h"
#include "ssi/eval/evaluate.h"

namespace ssi::eval {
namespace {

namespace fs = std::filesystem;

// Zero-mean projection SI-SNR, written out longhand.
double OracleSiSnr(const std::vector<double>& est, const std::vector<double>& ref) {
  const double n = static_cast<double>(ref.size());
  const double me = std::accumulate(est.begin(), est.end(), 0.0) / n;
  const double mr = std::accumulate(ref.begin(), ref.end(), 0.0) / n;
  double dot = 0, rr = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    dot += (est[i] - me) * (ref[i] - mr);
    rr += (ref[i] - mr) * (ref[i] - mr);
  }
  double s2 = 0, e2 = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double s = dot / rr * (ref[i] - mr);
    const double e = (est[i] - me) - s;
    s2 += s * s;
    e2 += e * e;
  }
  return std::clamp(10.0 * std::log10(s2 / e2), -50.0, 50.0);
}

class EvalCorpus : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("eval");
    degrade::ToyCorpusSpec spec;
    spec.speech = 4;
    spec.noise = 2;
    spec.rir = 2;
    spec.speech_seconds = 0.5;
    spec.noise_seconds = 1.0;
    spec.seed = 11;
    manifest_ = degrade::WriteToyCorpus((fs::path(dir_->path()) / "src").string(), spec);
  }
  static void TearDownTestSuite() { delete dir_; }

  static std::vector<PairEntry> Simulate(const std::string& name, int stage, int count, double seconds) {
    SimulateOptions opt;
    opt.manifest = manifest_;
    opt.out_dir = (fs::path(dir_->path()) / name).string();
    opt.stage = stage;
    opt.count = count;
    opt.segment_seconds = seconds;
    opt.seed = 5;
    return SimulateCorpus(opt);
  }

  static inline testing::TempDir* dir_ = nullptr;
  static inline std::string manifest_;
};

TEST_F(EvalCorpus, IdentityEnhancerHasZeroImprovement) {
  const auto pairs = Simulate("id", 2, 6, 0.2);
  const EvalReport r = Evaluate(pairs, [](const audio::Waveform& w) { return w; });
  ASSERT_EQ(r.files.size(), pairs.size());
  for (const auto& m : r.files) {
    EXPECT_EQ(m.si_snr_improvement, 0.0) << m.id;
    EXPECT_EQ(m.si_snr_in, m.si_snr_out);
  }
  EXPECT_EQ(r.aggregate.id, "mean");
}

TEST_F(EvalCorpus, TargetAsOutputHitsCapAndZeroLsd) {
  const auto pairs = Simulate("oracle", 2, 4, 0.2);
  std::size_t next = 0;
  const EvalReport r = Evaluate(pairs, [&](const audio::Waveform&) { return audio::ReadWav(pairs[next++].target); });
  for (const auto& m : r.files) {
    EXPECT_EQ(m.si_snr_out, 50.0) << m.id;
    EXPECT_NEAR(m.lsd, 0.0, 1e-12);
  }
}

TEST_F(EvalCorpus, MetricsMatchOracleAndAggregateIsMean) {
  const auto pairs = Simulate("smooth", 2, 5, 0.2);
  auto smooth = [](const audio::Waveform& w) {
    audio::Waveform o = w;
    for (std::size_t i = 1; i + 1 < w.size(); ++i) {
      o.samples[i] = (w.samples[i - 1] + 2.0 * w.samples[i] + w.samples[i + 1]) / 4.0;
    }
    return o;
  };
  const EvalReport r = Evaluate(pairs, smooth);
  double mean_impr = 0, mean_lsd = 0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto in = audio::ReadWav(pairs[k].input);
    const auto tg = audio::ReadWav(pairs[k].target);
    const double want_in = OracleSiSnr(in.samples, tg.samples);
    const double want_out = OracleSiSnr(smooth(in).samples, tg.samples);
    EXPECT_NEAR(r.files[k].si_snr_in, want_in, 1e-9);
    EXPECT_NEAR(r.files[k].si_snr_improvement, want_out - want_in, 1e-9);
    EXPECT_NEAR(r.files[k].duration_s, 0.2, 1e-12);
    mean_impr += r.files[k].si_snr_improvement / pairs.size();
    mean_lsd += r.files[k].lsd / pairs.size();
  }
  EXPECT_NEAR(r.aggregate.si_snr_improvement, mean_impr, 1e-12);
  EXPECT_NEAR(r.aggregate.lsd, mean_lsd, 1e-12);
}

TEST_F(EvalCorpus, ReportsWrittenAndInputsUntouched) {
  const auto pairs = Simulate("report", 1, 3, 0.1);
  const auto before = fs::last_write_time(pairs[0].input);
  const auto bytes_before = fs::file_size(pairs[0].input);
  const auto in_before = audio::ReadWav(pairs[0].input);
  const EvalReport r = Evaluate(pairs, [](const audio::Waveform& w) { return w; });
  const fs::path json = fs::path(dir_->path()) / "report.json";
  const fs::path csv = fs::path(dir_->path()) / "report.csv";
  WriteReportJson(json.string(), r);
  WriteReportCsv(csv.string(), r);

  nlohmann::json j;
  std::ifstream(json) >> j;
  EXPECT_EQ(j.at("files").size(), 3u);
  EXPECT_EQ(j.at("aggregate").at("id"), "mean");
  std::ifstream c(csv);
  std::string line;
  int lines = 0;
  while (std::getline(c, line)) ++lines;
  EXPECT_EQ(lines, 5);  // header, 3 files, mean

  EXPECT_EQ(fs::last_write_time(pairs[0].input), before);
  EXPECT_EQ(fs::file_size(pairs[0].input), bytes_before);
  EXPECT_EQ(audio::ReadWav(pairs[0].input).samples, in_before.samples);
}

TEST_F(EvalCorpus, LoadPairsRoundTrip) {
  const auto pairs = Simulate("load", 2, 3, 0.1);
  const auto loaded = LoadPairs((fs::path(dir_->path()) / "load" / "pairs.jsonl").string());
  ASSERT_EQ(loaded.size(), pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(loaded[i].id, pairs[i].id);
    EXPECT_EQ(fs::path(loaded[i].input), fs::path(pairs[i].input).lexically_normal());
    EXPECT_EQ(loaded[i].crop_offset, pairs[i].crop_offset);
    EXPECT_EQ(loaded[i].recipe.snr_db, pairs[i].recipe.snr_db);
  }
}

TEST_F(EvalCorpus, Stage1AuditWithinIntervalsAndReplays) {
  Simulate("audit1", 1, 400, 0.06);
  const AuditReport a = AuditCorpus((fs::path(dir_->path()) / "audit1").string());
  EXPECT_EQ(a.pairs, 400u);
  EXPECT_EQ(a.replayed, 400u);
  EXPECT_EQ(a.replay_failures, 0u);
  EXPECT_GT(a.total_windows, 0u);
  for (const auto& f : a.fractions) EXPECT_TRUE(f.within) << f.name << " " << f.observed << " vs " << f.expected;
}

TEST_F(EvalCorpus, Stage2AuditSnrAndReplay) {
  Simulate("audit2", 2, 60, 0.1);
  const AuditReport a = AuditCorpus((fs::path(dir_->path()) / "audit2").string(), 20);
  EXPECT_EQ(a.replayed, 20u);
  EXPECT_EQ(a.replay_failures, 0u);
  EXPECT_LE(a.max_snr_error_db, 0.1);
  bool has_reverb = false;
  for (const auto& f : a.fractions) has_reverb |= f.name == "reverb";
  EXPECT_TRUE(has_reverb);
}

TEST_F(EvalCorpus, AuditDetectsTamperedPair) {
  const auto pairs = Simulate("tamper", 1, 4, 0.1);
  audio::Waveform w = audio::ReadWav(pairs[2].input);
  w.samples[10] += 0.25;
  audio::WriteWav(pairs[2].input, w);
  const AuditReport a = AuditCorpus((fs::path(dir_->path()) / "tamper").string());
  EXPECT_EQ(a.replay_failures, 1u);
  ASSERT_EQ(a.failed_ids.size(), 1u);
  EXPECT_EQ(a.failed_ids[0], pairs[2].id);
}

TEST_F(EvalCorpus, AuditRejectsMissingOrEmptyDirectories) {
  EXPECT_THROW(AuditCorpus((fs::path(dir_->path()) / "nope").string()), ValidationError);
  const fs::path empty = fs::path(dir_->path()) / "empty";
  fs::create_directories(empty);
  EXPECT_THROW(AuditCorpus(empty.string()), ValidationError);
}

TEST_F(EvalCorpus, SimulateIsSeedDeterministic) {
  const auto a = Simulate("det_a", 2, 3, 0.1);
  const auto b = Simulate("det_b", 2, 3, 0.1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(audio::ReadWav(a[i].input).samples, audio::ReadWav(b[i].input).samples);
  }
}

TEST(Evaluate, RejectsEmptyList) {
  EXPECT_THROW(Evaluate({}, [](const audio::Waveform& w) { return w; }), ValidationError);
}

}  // namespace
}  // namespace ssi::eval
