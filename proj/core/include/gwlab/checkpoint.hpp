#pragma once

#include <string>

#include "gwlab/oracle.hpp"
#include "gwlab/questioner.hpp"

namespace gwlab {

/// On-disk model container: one JSON header line
///   {"format":"gwlab-ckpt-v1","model_kind":...,"config":...,"vocab":[...],
///    "manifest":[[name,[rows,cols]],...]}
/// followed by the parameter values as 32-bit little-endian floats in
/// manifest order. Math stays 64-bit in memory; storage is 32-bit.
inline constexpr const char* kCheckpointFormat = "gwlab-ckpt-v1";

std::string checkpoint_kind(const std::string& path);

void save_oracle(const OracleModel& model, const std::string& path);
OracleModel load_oracle(const std::string& path);

void save_guesser(const GuesserModel& model, const std::string& path);
GuesserModel load_guesser(const std::string& path);

/// Questioner manifests carry the estimator parameters under "est." (in the
/// guesser's own order) followed by the decoder's "dec." parameters, so a
/// frozen estimator round-trips bit-identically to its source checkpoint.
void save_questioner(const QuestionerModel& model, const std::string& path);
QuestionerModel load_questioner(const std::string& path);

}  // namespace gwlab
