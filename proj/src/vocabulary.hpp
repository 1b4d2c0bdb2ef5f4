#pragma once

// Label vocabulary shared by the synthetic graph and corpus generators, so
// that fixture narratives mention the same problems the graph encodes.

#include <array>
#include <string_view>

namespace kgcounsel::vocab {

inline constexpr std::array<std::string_view, 14> kCauseBases{
    "job loss",          "debt burden",        "food insecurity",
    "irregular income",  "loan repayment pressure", "housing insecurity",
    "medical expenses",  "domestic conflict",  "spousal abandonment",
    "death of family member", "child illness", "social stigma",
    "husband substance use",  "dowry demands"};
inline constexpr std::size_t kPovertyBases = 7;  // first seven cause bases are economic

inline constexpr std::array<std::string_view, 16> kEffectBases{
    "sleep problems",   "persistent worry",   "low mood",           "loss of appetite",
    "headaches",        "social withdrawal",  "anger outbursts",    "hopelessness",
    "fatigue",          "perceived spiritual affliction", "palpitations", "poor concentration",
    "crying spells",    "body aches",         "irritability",       "guilt"};

inline constexpr std::array<std::string_view, 16> kInterventionBases{
    "budget planning",        "savings group referral",  "behavioral activation schedule",
    "activity log review",    "breathing exercise",      "sleep hygiene routine",
    "problem-solving steps",  "family mediation session", "anger management practice",
    "livelihood training referral", "psychoeducation on stress", "peer support group",
    "religious leader engagement",  "medical referral",   "safety planning",
    "coping toolbox building"};

inline constexpr std::array<std::string_view, 10> kOutcomeBases{
    "improved sleep",          "reduced worry",          "better mood",
    "resumed daily activities", "stable household income", "reduced family conflict",
    "improved appetite",       "increased social contact", "repaid loan installment",
    "restored sense of control"};

inline constexpr std::array<std::string_view, 12> kCategoryLabels{
    "poverty drivers",        "family stressors",          "bereavement",
    "health stressors",       "social stressors",          "somatic symptoms",
    "emotional symptoms",     "behavioral symptoms",       "financial interventions",
    "psychological interventions", "social interventions", "recovery outcomes"};

}  // namespace kgcounsel::vocab
