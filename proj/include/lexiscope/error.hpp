#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lexiscope {

enum class ErrorCode {
  // corpus
  kMalformedLine,
  kDuplicateEntry,
  kUnknownPos,
  kUnknownWord,
  kPosMismatch,
  kDuplicateSource,
  kTooFewPairs,
  kIo,
  // numerics
  kDimensionMismatch,
  kTooFewPoints,
  kDimensionTooLarge,
  // features
  kBadBinCount,
  kImageTooSmall,
  kTooFewDescriptors,
  kOovWord,
  kSetMismatch,
  kBadMagic,
  kCountMismatch,
  kNonFiniteValue,
  kBadImage,
  // similarity / eval
  kEmptySet,
  kTooFewImages,
  kMissingGold,
  kGoldNotInCandidates,
  kInsufficientOverlap,
  // ranker
  kUnresolvablePair,
  kSingleClassData,
  // synth / config
  kBadConfig,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kDuplicateEntry: return "DuplicateEntry";
    case ErrorCode::kUnknownPos: return "UnknownPos";
    case ErrorCode::kUnknownWord: return "UnknownWord";
    case ErrorCode::kPosMismatch: return "PosMismatch";
    case ErrorCode::kDuplicateSource: return "DuplicateSource";
    case ErrorCode::kTooFewPairs: return "TooFewPairs";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kDimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::kBadBinCount: return "BadBinCount";
    case ErrorCode::kImageTooSmall: return "ImageTooSmall";
    case ErrorCode::kTooFewDescriptors: return "TooFewDescriptors";
    case ErrorCode::kOovWord: return "OovWord";
    case ErrorCode::kSetMismatch: return "SetMismatch";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kBadImage: return "BadImage";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kTooFewImages: return "TooFewImages";
    case ErrorCode::kMissingGold: return "MissingGold";
    case ErrorCode::kGoldNotInCandidates: return "GoldNotInCandidates";
    case ErrorCode::kInsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::kUnresolvablePair: return "UnresolvablePair";
    case ErrorCode::kSingleClassData: return "SingleClassData";
    case ErrorCode::kBadConfig: return "BadConfig";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace lexiscope
