#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "xaistudy/common/error.hpp"

namespace xaistudy {

// Experimental arm: what the participant sees on each task page.
enum class Condition { F, FP, FPE_LIME, FPE_SHAP, FPE_SG, FPE_IG, FPE_GRAD, FPE_GI };

inline constexpr std::array<Condition, 8> kAllConditions{Condition::F,        Condition::FP,
                                                         Condition::FPE_LIME, Condition::FPE_SHAP,
                                                         Condition::FPE_SG,   Condition::FPE_IG,
                                                         Condition::FPE_GRAD, Condition::FPE_GI};

// The six arms of the reference benchmark.
inline constexpr std::array<Condition, 6> kBenchmarkConditions{Condition::F,        Condition::FP,
                                                               Condition::FPE_LIME, Condition::FPE_SHAP,
                                                               Condition::FPE_SG,   Condition::FPE_IG};

inline std::string to_string(Condition c) {
  switch (c) {
    case Condition::F: return "F";
    case Condition::FP: return "FP";
    case Condition::FPE_LIME: return "FPE-LIME";
    case Condition::FPE_SHAP: return "FPE-SHAP";
    case Condition::FPE_SG: return "FPE-SG";
    case Condition::FPE_IG: return "FPE-IG";
    case Condition::FPE_GRAD: return "FPE-GRAD";
    case Condition::FPE_GI: return "FPE-GI";
  }
  return "F";
}

inline Condition parse_condition(std::string_view text) {
  for (auto c : kAllConditions)
    if (to_string(c) == text) return c;
  throw ValidationError("unknown condition '" + std::string(text) + "'");
}

inline bool shows_prediction(Condition c) { return c != Condition::F; }
inline bool shows_explanation(Condition c) { return c != Condition::F && c != Condition::FP; }

// Explainer method identifier backing an FPE condition.
inline std::optional<std::string> explanation_method(Condition c) {
  switch (c) {
    case Condition::FPE_LIME: return "lime";
    case Condition::FPE_SHAP: return "kernel_shap";
    case Condition::FPE_SG: return "smoothgrad";
    case Condition::FPE_IG: return "integrated_gradients";
    case Condition::FPE_GRAD: return "grad";
    case Condition::FPE_GI: return "grad_x_input";
    default: return std::nullopt;
  }
}

// Default survey visibility: no questions under F; FP omits the
// explanation-specific items Q4 and Q10-Q13; explanation arms see all 16.
inline bool default_question_visible(Condition c, std::string_view question_id) {
  if (c == Condition::F) return false;
  if (c == Condition::FP) {
    return !(question_id == "Q4" || question_id == "Q10" || question_id == "Q11" || question_id == "Q12" ||
             question_id == "Q13");
  }
  return true;
}

}  // namespace xaistudy
