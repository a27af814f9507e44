#include "ssi/models/config.h"

#include "ssi/common/error.h"

namespace ssi::models {

std::string ToString(ModelKind k) {
  switch (k) {
    case ModelKind::kDccrn: return "dccrn";
    case ModelKind::kGateDccrn: return "gate_dccrn";
    case ModelKind::kSDccrn: return "s_dccrn";
    case ModelKind::kSDccsn: return "s_dccsn";
    case ModelKind::kCascadeSDccrn: return "gate_dccrn+s_dccrn";
    case ModelKind::kCascadeSDccsn: return "gate_dccrn+s_dccsn";
  }
  return "unknown";
}

ModelKind ModelKindFromString(const std::string& s) {
  for (ModelKind k : {ModelKind::kDccrn, ModelKind::kGateDccrn, ModelKind::kSDccrn, ModelKind::kSDccsn,
                      ModelKind::kCascadeSDccrn, ModelKind::kCascadeSDccsn}) {
    if (ToString(k) == s) return k;
  }
  throw ValidationError("unknown model kind '" + s + "'");
}

bool IsCascade(ModelKind k) { return k == ModelKind::kCascadeSDccrn || k == ModelKind::kCascadeSDccsn; }

namespace {

void RequireChannels(const std::vector<int64_t>& ch, const char* what) {
  Require(ch.size() == 6, std::string(what) + " must list 6 layers");
  for (int64_t c : ch) Require(c > 0 && c % 2 == 0, std::string(what) + " entries must be positive and even");
}

}  // namespace

void ModelConfig::Validate() const {
  stft.Validate(sample_rate);
  Require(stft.fft_size % 2 == 0, "fft_size must be even");
  RequireChannels(dccrn_channels, "dccrn_channels");
  RequireChannels(sdccsn_channels, "sdccsn_channels");
  Require(kernel_f > 0 && kernel_t > 0 && stride_f > 0, "kernel and stride must be positive");
  Require(lstm_layers > 0 && lstm_hidden > 0, "LSTM sizes must be positive");
  Require(sdccrn_lstm_layers > 0 && sdccrn_lstm_hidden > 0, "S-DCCRN LSTM sizes must be positive");
  Require(ced_cfd_channels > 0 && ced_cfd_channels % 2 == 0, "ced_cfd_channels must be positive and even");
  Require(dense_channels > 0 && dense_channels % 2 == 0, "dense_channels must be positive and even");
  Require(dense_depth > 0, "dense_depth must be positive");
  Require(dense_kernel_f % 2 == 1 && dense_kernel_t > 0, "dense kernel must be odd in frequency");
  Require(stcm_hidden > 0, "stcm_hidden must be positive");
  Require(stcm_kernel > 0 && stcm_blocks > 0 && !stcm_dilations.empty(), "STCM sizes must be positive");
  Require(sub_bands > 0, "sub_bands must be positive");
  // CED halves the frequency axis twice before the band split.
  Require(NetworkBins() % (4 * sub_bands) == 0, "network bins must split evenly into sub-bands");
}

ModelConfig ModelConfig::Tiny() {
  ModelConfig c;
  c.dccrn_channels = {8, 8, 16, 16, 16, 16};
  c.lstm_hidden = 32;
  c.sdccsn_channels = {8, 8, 16, 16, 16, 16};
  c.ced_cfd_channels = 8;
  c.dense_channels = 8;
  c.dense_depth = 2;
  c.sdccrn_lstm_hidden = 16;
  c.stcm_hidden = 16;
  c.stcm_blocks = 1;
  return c;
}

nn::ConvSpec ModelConfig::UNetSpec() const {
  nn::ConvSpec s;
  s.kernel_f = kernel_f;
  s.kernel_t = kernel_t;
  s.stride_f = stride_f;
  s.pad_f = kernel_f / 2;
  return s;
}

nn::StcmConfig ModelConfig::Stcm() const {
  nn::StcmConfig s;
  s.hidden = stcm_hidden;
  s.kernel = stcm_kernel;
  s.dilations = stcm_dilations;
  return s;
}

namespace {

std::string WindowName(audio::WindowType w) {
  switch (w) {
    case audio::WindowType::kSqrtHann: return "sqrt_hann";
    case audio::WindowType::kHann: return "hann";
    case audio::WindowType::kRect: return "rect";
  }
  return "sqrt_hann";
}

audio::WindowType WindowFromName(const std::string& s) {
  if (s == "sqrt_hann") return audio::WindowType::kSqrtHann;
  if (s == "hann") return audio::WindowType::kHann;
  if (s == "rect") return audio::WindowType::kRect;
  throw ValidationError("unknown window '" + s + "'");
}

template <typename T>
void Get(const nlohmann::json& j, const char* key, T& v) {
  if (j.contains(key)) j.at(key).get_to(v);
}

}  // namespace

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"sample_rate", c.sample_rate},
                     {"stft",
                      {{"frame_ms", c.stft.frame_ms},
                       {"hop_ms", c.stft.hop_ms},
                       {"fft_size", c.stft.fft_size},
                       {"window", WindowName(c.stft.window)}}},
                     {"dccrn_channels", c.dccrn_channels},
                     {"kernel_f", c.kernel_f},
                     {"kernel_t", c.kernel_t},
                     {"stride_f", c.stride_f},
                     {"lstm_layers", c.lstm_layers},
                     {"lstm_hidden", c.lstm_hidden},
                     {"sdccsn_channels", c.sdccsn_channels},
                     {"ced_cfd_channels", c.ced_cfd_channels},
                     {"dense_channels", c.dense_channels},
                     {"dense_depth", c.dense_depth},
                     {"dense_kernel_f", c.dense_kernel_f},
                     {"dense_kernel_t", c.dense_kernel_t},
                     {"sub_bands", c.sub_bands},
                     {"sdccrn_lstm_layers", c.sdccrn_lstm_layers},
                     {"sdccrn_lstm_hidden", c.sdccrn_lstm_hidden},
                     {"stcm_hidden", c.stcm_hidden},
                     {"stcm_kernel", c.stcm_kernel},
                     {"stcm_dilations", c.stcm_dilations},
                     {"stcm_blocks", c.stcm_blocks}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c = ModelConfig{};
  Get(j, "sample_rate", c.sample_rate);
  if (j.contains("stft")) {
    const auto& s = j.at("stft");
    Get(s, "frame_ms", c.stft.frame_ms);
    Get(s, "hop_ms", c.stft.hop_ms);
    Get(s, "fft_size", c.stft.fft_size);
    if (s.contains("window")) c.stft.window = WindowFromName(s.at("window").get<std::string>());
  }
  Get(j, "dccrn_channels", c.dccrn_channels);
  Get(j, "kernel_f", c.kernel_f);
  Get(j, "kernel_t", c.kernel_t);
  Get(j, "stride_f", c.stride_f);
  Get(j, "lstm_layers", c.lstm_layers);
  Get(j, "lstm_hidden", c.lstm_hidden);
  Get(j, "sdccsn_channels", c.sdccsn_channels);
  Get(j, "ced_cfd_channels", c.ced_cfd_channels);
  Get(j, "dense_channels", c.dense_channels);
  Get(j, "dense_depth", c.dense_depth);
  Get(j, "dense_kernel_f", c.dense_kernel_f);
  Get(j, "dense_kernel_t", c.dense_kernel_t);
  Get(j, "sub_bands", c.sub_bands);
  Get(j, "sdccrn_lstm_layers", c.sdccrn_lstm_layers);
  Get(j, "sdccrn_lstm_hidden", c.sdccrn_lstm_hidden);
  Get(j, "stcm_hidden", c.stcm_hidden);
  Get(j, "stcm_kernel", c.stcm_kernel);
  Get(j, "stcm_dilations", c.stcm_dilations);
  Get(j, "stcm_blocks", c.stcm_blocks);
  c.Validate();
}

}  // namespace ssi::models
