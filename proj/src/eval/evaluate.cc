#include "ssi/eval/evaluate.h"

#include <fstream>
#include <iomanip>

#include "ssi/audio/metrics.h"
#include "ssi/audio/wav_io.h"
#include "ssi/common/error.h"

namespace ssi::eval {

EvalReport Evaluate(const std::vector<PairEntry>& pairs, const Enhancer& enhance, const audio::StftConfig& stft) {
  Require(!pairs.empty(), "nothing to evaluate");
  EvalReport r;
  r.aggregate.id = "mean";
  for (const auto& p : pairs) {
    const audio::Waveform input = audio::ReadWav(p.input);
    const audio::Waveform target = audio::ReadWav(p.target);
    Require(input.size() == target.size(), "input and target lengths differ for " + p.id);
    const audio::Waveform out = enhance(input);
    Require(out.size() == target.size(), "enhanced output length differs from the target for " + p.id);
    FileMetrics m;
    m.id = p.id;
    m.si_snr_in = audio::SiSnrDb(input.samples, target.samples);
    m.si_snr_out = audio::SiSnrDb(out.samples, target.samples);
    m.si_snr_improvement = m.si_snr_out - m.si_snr_in;
    m.lsd = audio::Lsd(out, target, stft);
    m.clipped_fraction = audio::ClippedFraction(out);
    m.duration_s = target.DurationSeconds();
    r.files.push_back(m);
  }
  const double n = static_cast<double>(r.files.size());
  for (const auto& m : r.files) {
    r.aggregate.si_snr_in += m.si_snr_in / n;
    r.aggregate.si_snr_out += m.si_snr_out / n;
    r.aggregate.si_snr_improvement += m.si_snr_improvement / n;
    r.aggregate.lsd += m.lsd / n;
    r.aggregate.clipped_fraction += m.clipped_fraction / n;
    r.aggregate.duration_s += m.duration_s / n;
  }
  return r;
}

namespace {

nlohmann::json MetricsJson(const FileMetrics& m) {
  return {{"id", m.id},
          {"si_snr_in", m.si_snr_in},
          {"si_snr_out", m.si_snr_out},
          {"si_snr_improvement", m.si_snr_improvement},
          {"lsd", m.lsd},
          {"clipped_fraction", m.clipped_fraction},
          {"duration_s", m.duration_s}};
}

}  // namespace

nlohmann::json ToJson(const EvalReport& r) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& m : r.files) files.push_back(MetricsJson(m));
  return {{"files", files},
          {"aggregate", MetricsJson(r.aggregate)},
          {"model",
           {{"kind", r.model.kind},
            {"params", r.model.params},
            {"rtf", r.model.rtf},
            {"hardware", r.model.hardware}}}};
}

void WriteReportJson(const std::string& path, const EvalReport& r) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write report: " + path);
  f << ToJson(r).dump(2) << '\n';
}

void WriteReportCsv(const std::string& path, const EvalReport& r) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write report: " + path);
  f << "id,si_snr_in,si_snr_out,si_snr_improvement,lsd,clipped_fraction,duration_s\n" << std::setprecision(10);
  auto row = [&f](const FileMetrics& m) {
    f << m.id << ',' << m.si_snr_in << ',' << m.si_snr_out << ',' << m.si_snr_improvement << ',' << m.lsd << ','
      << m.clipped_fraction << ',' << m.duration_s << '\n';
  };
  for (const auto& m : r.files) row(m);
  row(r.aggregate);
}

}  // namespace ssi::eval
