#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "mlc/baselines.hpp"
#include "mlc/msdn.hpp"

namespace mlc {

/// Versioned text model format ("mlc-model v1"). Weights are written with
/// enough decimal digits to reload bit-identically, so a saved model gives
/// bit-identical predictions. Files produced from the same seed and config
/// are byte-identical.
///
///   mlc-model v1
///   kind <msdn|br|cc|pcc|sta>
///   <config lines>
///   <named parameter blocks, one flat whitespace-separated array per line>

void save_msdn(const MsdnModel& model, std::ostream& out);
MsdnModel load_msdn(std::istream& in);

void save_br(const BrModel& model, std::ostream& out);
BrModel load_br(std::istream& in);

/// `kind` distinguishes a chain trained for greedy decoding from one meant
/// for exhaustive decoding ("cc" or "pcc"); the payload is identical.
void save_chain(const ChainModel& model, std::ostream& out, const std::string& kind = "cc");
ChainModel load_chain(std::istream& in);

void save_sta(const StackModel& model, std::ostream& out);
StackModel load_sta(std::istream& in);

/// Reads the "kind" header of a saved model file.
std::string peek_model_kind(const std::filesystem::path& path);

}  // namespace mlc
