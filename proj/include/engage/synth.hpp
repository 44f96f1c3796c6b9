#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "engage/corpus.hpp"
#include "engage/features.hpp"

namespace engage {

/// Shape of the latent engagement as a function of the extracted content features.
///  linear    — log target linear in several features
///  step      — jump at the median word count plus a small published-date slope
///  nonlinear — product of standardised word count and published date
enum class LatentForm { linear, step, nonlinear };

LatentForm parse_latent_form(std::string_view name);
std::string_view to_string(LatentForm f);

struct GeneratorSpec {
  int n_lectures = 200;
  int n_users = 40;
  LatentForm form = LatentForm::linear;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;

  int min_words = 150;
  int max_words = 2500;
  int max_viewers = 12;  // per lecture, capped by n_users

  void validate() const;
};

struct SyntheticCorpus {
  std::vector<Lecture> lectures;
  std::vector<ViewEvent> events;
  std::vector<double> latent;  // noise-free target in (0, 1], per lecture
  std::vector<double> target;  // latent + noise, clamped; the median watch fraction per lecture
};

/// Deterministic given the spec. Every lecture gets at least min(5, n_users) viewers, and
/// its viewers' watch fractions have median exactly `target`.
SyntheticCorpus generate(const GeneratorSpec& spec, const Lexicons& lex, const SubjectMap& subjects);

}  // namespace engage
