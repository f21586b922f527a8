#pragma once

#include <stdexcept>
#include <string>

namespace denslice {

enum class errc {
  single_valued_feature,
  type_mismatch,
  header_mismatch,
  missing_value,
  unknown_level,
  empty_subset,
  epsilon_out_of_range,
  gap_not_boundary,
  gap_not_contained,
  zero_range,
  m_too_large,
  subsample_too_small,
  too_few_rows,
  not_categorical,
  negative_input,
  row_outside_space,
  non_renderable_feature,
  model_data_mismatch,
  invalid_argument,
  parse_error,
  io_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::single_valued_feature: return "SingleValuedFeature";
    case errc::type_mismatch: return "TypeMismatch";
    case errc::header_mismatch: return "HeaderMismatch";
    case errc::missing_value: return "MissingValue";
    case errc::unknown_level: return "UnknownLevel";
    case errc::empty_subset: return "EmptySubset";
    case errc::epsilon_out_of_range: return "EpsilonOutOfRange";
    case errc::gap_not_boundary: return "GapNotBoundary";
    case errc::gap_not_contained: return "GapNotContained";
    case errc::zero_range: return "ZeroRange";
    case errc::m_too_large: return "MTooLarge";
    case errc::subsample_too_small: return "SubsampleTooSmall";
    case errc::too_few_rows: return "TooFewRows";
    case errc::not_categorical: return "NotCategorical";
    case errc::negative_input: return "NegativeInput";
    case errc::row_outside_space: return "RowOutsideSpace";
    case errc::non_renderable_feature: return "NonRenderableFeature";
    case errc::model_data_mismatch: return "ModelDataMismatch";
    case errc::invalid_argument: return "InvalidArgument";
    case errc::parse_error: return "ParseError";
    case errc::io_error: return "IoError";
  }
  return "UnknownError";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace denslice
