#pragma once

#include <string>

#include "ssi/audio/waveform.h"

namespace ssi::audio {

enum class WavSampleFormat { kPcm16, kFloat32 };

// Mono RIFF/WAVE. Reads 16-bit PCM and 32-bit IEEE float (including the
// WAVE_FORMAT_EXTENSIBLE wrapper); the header sample rate is authoritative.
Waveform ReadWav(const std::string& path);
void WriteWav(const std::string& path, const Waveform& w,
              WavSampleFormat format = WavSampleFormat::kFloat32);

}  // namespace ssi::audio
