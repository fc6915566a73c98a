#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "annodyn/corpus.hpp"

namespace annodyn {

enum class TagCountMode { occurrences, unique };

/// Tag names whose presence marks rich annotation content.
const std::vector<std::string>& default_quality_tags();

/// Count opening tags whose name is in `tags`. Closing tags, comments and
/// malformed regions contribute nothing; the scanner never fails.
int quality_tag_count(const std::string& body_html,
                      TagCountMode mode = TagCountMode::occurrences,
                      const std::vector<std::string>& tags = default_quality_tags());

/// Length of the text content in code points: markup stripped, character
/// entities decoded.
std::int64_t annotation_length(const std::string& body_html);

/// Drop section-header lines like "[Verse 1: ...]" (trimmed line starting
/// with '[' and ending with ']'), then collapse whitespace runs to single
/// spaces and trim the ends. Output is the canonical text both coverage and
/// tokenization run on.
std::string strip_headers(const std::string& raw_lyrics);

/// Lowercased tokens split on non-alphanumeric boundaries; apostrophes stay
/// only between alphanumerics ("don't" is one token, a trailing apostrophe
/// is dropped).
std::vector<std::string> tokenize(const std::string& text);

struct CoverageResult {
    std::int64_t covered_chars = 0; // A
    std::int64_t total_chars = 0;   // L
    double coverage = 0.0;          // min(A/L, 1)
    int unmatched_segments = 0;     // segments with no exact occurrence in the lyrics
};

/// Share of the stripped lyrics covered by annotated segments. Every
/// non-overlapping occurrence of a segment counts (a chorus annotated once
/// covers each repetition); positions covered by several segments count
/// once. A segment with no exact occurrence contributes its own length,
/// capped by L, and is reported in unmatched_segments.
CoverageResult annotation_coverage(const std::string& raw_lyrics,
                                   const std::vector<std::string>& segment_texts);

struct OriginalityModel {
    std::int64_t n_songs = 0;
    std::unordered_map<std::string, std::int64_t> df; // songs containing the word
    std::unordered_map<std::string, double> idf;      // ln(n_songs / df)
};

OriginalityModel build_idf(const Corpus& corpus);

/// Rarity score of a text: mean of the 60th, 75th and 90th percentiles
/// (linear interpolation) over the idf values of its unique known tokens.
/// Unknown tokens are skipped; no usable token is an error.
double originality(const std::string& lyric_text, const OriginalityModel& model);

} // namespace annodyn
