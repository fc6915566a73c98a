#include "annodyn/textmetrics.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "annodyn/errors.hpp"
#include "annodyn/stats.hpp"
#include "annodyn/utf8.hpp"

namespace annodyn {
namespace {

bool is_ascii_space(char32_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// U+00A0 and friends behave as spaces in crawled text
bool is_space_cp(char32_t c) { return is_ascii_space(c) || c == 0x00A0 || c == 0x2009; }

bool is_ascii_alnum(char32_t c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

char32_t to_lower_cp(char32_t c) { return (c >= 'A' && c <= 'Z') ? c + 32 : c; }

bool is_apostrophe(char32_t c) { return c == '\'' || c == 0x2019; }

// curly quotes, dashes, ellipsis: punctuation even though >= 0x80
bool is_wide_punct(char32_t c) {
    switch (c) {
    case 0x2018: case 0x201C: case 0x201D: case 0x2013: case 0x2014:
    case 0x2026: case 0x00AB: case 0x00BB: case 0xFFFD:
        return true;
    default:
        return false;
    }
}

// token letter, apostrophes handled separately by context
bool is_token_char(char32_t c) {
    if (is_ascii_alnum(c)) return true;
    if (c < 0x80) return false;
    return !is_space_cp(c) && !is_wide_punct(c) && !is_apostrophe(c);
}

bool is_tag_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-';
}

std::string ascii_lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Scan one tag starting at s[pos] == '<'. Returns the position just past the
// tag and fills `name` (lowercased) for opening tags; name stays empty for
// closing tags, comments, doctypes and stray '<'.
std::size_t scan_tag(const std::string& s, std::size_t pos, std::string& name) {
    name.clear();
    std::size_t i = pos + 1;
    if (i >= s.size()) return pos + 1;
    if (s[i] == '!' || s[i] == '?') {
        if (s.compare(i, 3, "!--") == 0) {
            std::size_t end = s.find("-->", i + 3);
            return end == std::string::npos ? s.size() : end + 3;
        }
        std::size_t end = s.find('>', i);
        return end == std::string::npos ? s.size() : end + 1;
    }
    bool closing = false;
    if (s[i] == '/') {
        closing = true;
        ++i;
    }
    // HTML only opens a tag on a letter; "<3" and "< " stay literal text
    if (i >= s.size() || !std::isalpha(static_cast<unsigned char>(s[i]))) return pos + 1;
    std::size_t name_start = i;
    while (i < s.size() && is_tag_name_char(s[i])) ++i;
    std::string tag = ascii_lower(s.substr(name_start, i - name_start));
    // attributes may contain quoted '>', tolerate by honoring quotes
    char quote = 0;
    while (i < s.size()) {
        char c = s[i];
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '>') {
            ++i;
            break;
        }
        ++i;
    }
    if (!closing) name = std::move(tag);
    return i;
}

// decode "&amp;"-style entities in-place over code points
void append_entity_decoded(std::vector<char32_t>& out, const std::string& text) {
    std::vector<char32_t> cps = utf8_decode(text);
    std::size_t i = 0;
    while (i < cps.size()) {
        if (cps[i] != '&') {
            out.push_back(cps[i++]);
            continue;
        }
        std::size_t semi = i + 1;
        while (semi < cps.size() && semi - i <= 10 && cps[semi] != ';') ++semi;
        if (semi >= cps.size() || cps[semi] != ';') {
            out.push_back(cps[i++]);
            continue;
        }
        std::string ent;
        for (std::size_t k = i + 1; k < semi; ++k) {
            if (cps[k] > 0x7F) {
                ent.clear();
                break;
            }
            ent.push_back(static_cast<char>(cps[k]));
        }
        char32_t decoded = 0;
        bool ok = true;
        if (ent == "amp") decoded = '&';
        else if (ent == "lt") decoded = '<';
        else if (ent == "gt") decoded = '>';
        else if (ent == "quot") decoded = '"';
        else if (ent == "apos") decoded = '\'';
        else if (ent == "nbsp") decoded = 0x00A0;
        else if (ent.size() > 1 && ent[0] == '#') {
            char32_t v = 0;
            std::size_t k = 1;
            int base = 10;
            if (ent[1] == 'x' || ent[1] == 'X') {
                base = 16;
                k = 2;
            }
            ok = k < ent.size();
            for (; k < ent.size() && ok; ++k) {
                char c = static_cast<char>(std::tolower(static_cast<unsigned char>(ent[k])));
                int digit;
                if (c >= '0' && c <= '9') digit = c - '0';
                else if (base == 16 && c >= 'a' && c <= 'f') digit = c - 'a' + 10;
                else { ok = false; break; }
                v = v * static_cast<char32_t>(base) + static_cast<char32_t>(digit);
                if (v > 0x10FFFF) { ok = false; break; }
            }
            decoded = v;
        } else {
            ok = false;
        }
        if (ok) {
            out.push_back(decoded);
            i = semi + 1;
        } else {
            out.push_back(cps[i++]); // unknown entity stays literal
        }
    }
}

std::vector<char32_t> strip_tags_decode(const std::string& body_html) {
    std::vector<char32_t> out;
    std::string pending;
    std::string name;
    std::size_t i = 0;
    std::size_t text_start = 0;
    while (i < body_html.size()) {
        if (body_html[i] == '<') {
            std::size_t next = scan_tag(body_html, i, name);
            if (next == i + 1) { // literal '<', keep as text
                ++i;
                continue;
            }
            pending.append(body_html, text_start, i - text_start);
            i = next;
            text_start = i;
        } else {
            ++i;
        }
    }
    pending.append(body_html, text_start, body_html.size() - text_start);
    append_entity_decoded(out, pending);
    return out;
}

std::vector<char32_t> normalized_cps(const std::string& raw) {
    return utf8_decode(strip_headers(raw));
}

} // namespace

const std::vector<std::string>& default_quality_tags() {
    static const std::vector<std::string> tags = {
        "a", "img", "iframe", "blockquote", "twitter-widget", "ul", "ol", "embedly-embed",
    };
    return tags;
}

int quality_tag_count(const std::string& body_html, TagCountMode mode,
                      const std::vector<std::string>& tags) {
    std::unordered_set<std::string> wanted(tags.begin(), tags.end());
    std::unordered_set<std::string> seen;
    int occurrences = 0;
    std::string name;
    std::size_t i = 0;
    while (i < body_html.size()) {
        if (body_html[i] != '<') {
            ++i;
            continue;
        }
        std::size_t next = scan_tag(body_html, i, name);
        if (!name.empty() && wanted.count(name)) {
            ++occurrences;
            seen.insert(name);
        }
        i = std::max(next, i + 1);
    }
    return mode == TagCountMode::occurrences ? occurrences : static_cast<int>(seen.size());
}

std::int64_t annotation_length(const std::string& body_html) {
    return static_cast<std::int64_t>(strip_tags_decode(body_html).size());
}

std::string strip_headers(const std::string& raw_lyrics) {
    std::vector<char32_t> cps = utf8_decode(raw_lyrics);
    std::vector<char32_t> kept;
    kept.reserve(cps.size());
    std::size_t i = 0;
    while (i <= cps.size()) {
        std::size_t eol = i;
        while (eol < cps.size() && cps[eol] != '\n') ++eol;
        std::size_t a = i, b = eol;
        while (a < b && is_space_cp(cps[a])) ++a;
        while (b > a && is_space_cp(cps[b - 1])) --b;
        bool header = (b > a) && cps[a] == '[' && cps[b - 1] == ']';
        if (!header) {
            for (std::size_t k = i; k < eol; ++k) kept.push_back(cps[k]);
            kept.push_back('\n');
        }
        if (eol == cps.size()) break;
        i = eol + 1;
    }
    // collapse whitespace runs, trim ends
    std::vector<char32_t> out;
    out.reserve(kept.size());
    bool in_space = true; // leading spaces dropped
    for (char32_t c : kept) {
        if (is_space_cp(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(c);
    }
    return utf8_encode(out);
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<char32_t> cps = utf8_decode(text);
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    };
    for (std::size_t i = 0; i < cps.size(); ++i) {
        char32_t c = to_lower_cp(cps[i]);
        if (is_token_char(c)) {
            utf8_append(cur, c);
        } else if (is_apostrophe(c) && i > 0 && i + 1 < cps.size() &&
                   is_token_char(to_lower_cp(cps[i - 1])) &&
                   is_token_char(to_lower_cp(cps[i + 1]))) {
            utf8_append(cur, '\'');
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

CoverageResult annotation_coverage(const std::string& raw_lyrics,
                                   const std::vector<std::string>& segment_texts) {
    std::vector<char32_t> lyrics = normalized_cps(raw_lyrics);
    if (lyrics.empty()) throw DomainError("coverage undefined: lyrics empty after header removal");

    std::vector<char> covered(lyrics.size(), 0);
    std::int64_t unmatched_extra = 0;
    int unmatched = 0;
    for (const std::string& segment : segment_texts) {
        std::vector<char32_t> seg = normalized_cps(segment);
        if (seg.empty()) continue;
        bool found_any = false;
        auto it = lyrics.begin();
        while (true) {
            it = std::search(it, lyrics.end(), seg.begin(), seg.end());
            if (it == lyrics.end()) break;
            found_any = true;
            std::size_t at = static_cast<std::size_t>(it - lyrics.begin());
            std::fill(covered.begin() + static_cast<std::ptrdiff_t>(at),
                      covered.begin() + static_cast<std::ptrdiff_t>(at + seg.size()), 1);
            it += static_cast<std::ptrdiff_t>(seg.size());
        }
        if (!found_any) {
            ++unmatched;
            unmatched_extra += static_cast<std::int64_t>(seg.size());
        }
    }

    CoverageResult r;
    r.total_chars = static_cast<std::int64_t>(lyrics.size());
    r.covered_chars = std::count(covered.begin(), covered.end(), 1) + unmatched_extra;
    r.covered_chars = std::min(r.covered_chars, r.total_chars);
    r.unmatched_segments = unmatched;
    r.coverage = static_cast<double>(r.covered_chars) / static_cast<double>(r.total_chars);
    return r;
}

OriginalityModel build_idf(const Corpus& corpus) {
    if (corpus.songs.empty()) throw DomainError("idf model needs at least one song");
    OriginalityModel m;
    m.n_songs = static_cast<std::int64_t>(corpus.songs.size());
    for (const Song& song : corpus.songs) {
        std::vector<std::string> tokens = tokenize(strip_headers(song.raw_lyrics));
        std::sort(tokens.begin(), tokens.end());
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
        for (std::string& t : tokens) ++m.df[std::move(t)];
    }
    m.idf.reserve(m.df.size());
    for (const auto& [word, df] : m.df)
        m.idf.emplace(word, std::log(static_cast<double>(m.n_songs) / static_cast<double>(df)));
    return m;
}

double originality(const std::string& lyric_text, const OriginalityModel& model) {
    std::vector<std::string> tokens = tokenize(lyric_text);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    std::vector<double> idfs;
    idfs.reserve(tokens.size());
    for (const std::string& t : tokens) {
        auto it = model.idf.find(t);
        if (it != model.idf.end()) idfs.push_back(it->second);
    }
    if (idfs.empty()) throw DomainError("originality undefined: no token known to the model");
    std::sort(idfs.begin(), idfs.end());
    double p60 = percentile_sorted(idfs, 60.0);
    double p75 = percentile_sorted(idfs, 75.0);
    double p90 = percentile_sorted(idfs, 90.0);
    return (p60 + p75 + p90) / 3.0;
}

} // namespace annodyn
