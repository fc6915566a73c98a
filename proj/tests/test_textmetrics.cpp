#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "annodyn/stats.hpp"
#include "annodyn/textmetrics.hpp"
#include "annodyn/utf8.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace annodyn;

TEST_CASE("quality tag counting") {
    const std::string rich =
        "<blockquote>quote</blockquote><img src=x><a href=y>z</a>";
    CHECK(quality_tag_count(rich, TagCountMode::unique) == 3);
    CHECK(quality_tag_count(rich, TagCountMode::occurrences) == 3);

    CHECK(quality_tag_count("plain text, no tags at all") == 0);
    CHECK(quality_tag_count("plain text", TagCountMode::unique) == 0);

    CHECK(quality_tag_count("<a>..</a><a>..</a>") == 2);
    CHECK(quality_tag_count("<a>..</a><a>..</a>", TagCountMode::unique) == 1);

    SUBCASE("scanner details") {
        CHECK(quality_tag_count("<IMG SRC=x>") == 1);              // case-insensitive
        CHECK(quality_tag_count("<img/>") == 1);                   // self-closing
        CHECK(quality_tag_count("<twitter-widget id=1></twitter-widget>") == 1);
        CHECK(quality_tag_count("</a></img>") == 0);               // closing only
        CHECK(quality_tag_count("<!-- <img> --><p>x</p>") == 0);   // comment dropped
        CHECK(quality_tag_count("<abbr>x</abbr><span>") == 0);     // not in the set
        CHECK(quality_tag_count("<ablockquote>") == 0);            // longer name, no match
        CHECK(quality_tag_count("<a href=\"x>y\">t</a><a>") == 2); // '>' inside quotes
        CHECK(quality_tag_count("x < y and z <3 <a>") == 1);       // stray '<' is text
        CHECK(quality_tag_count("<ul><ol><iframe><embedly-embed>") == 4);
        CHECK(quality_tag_count("") == 0);
    }

    SUBCASE("custom tag set") {
        std::vector<std::string> tags = {"em"};
        CHECK(quality_tag_count("<em>x</em><a>y</a>", TagCountMode::occurrences, tags) == 1);
    }

    SUBCASE("occurrences never below unique") {
        std::mt19937_64 rng(3);
        const char* pieces[] = {"<a>", "</a>", "<img>", "text ", "<blockquote>", "<x", ">",
                                "<ul>", "&amp;", "<!-- c -->", "<ol x='>'>", "plain"};
        for (int round = 0; round < 200; ++round) {
            std::string soup;
            for (int k = 0; k < 12; ++k) soup += pieces[rng() % std::size(pieces)];
            CHECK(quality_tag_count(soup, TagCountMode::occurrences) >=
                  quality_tag_count(soup, TagCountMode::unique));
        }
    }
}

TEST_CASE("annotation length strips markup and decodes entities") {
    CHECK(annotation_length("<b>ab</b>c") == 3);
    CHECK(annotation_length("") == 0);
    CHECK(annotation_length("a&amp;b") == 3);

    CHECK(annotation_length("<p>a<br>b</p>") == 2);
    CHECK(annotation_length("&#65;&#x42;") == 2);       // numeric refs
    CHECK(annotation_length("&zzz;") == 5);             // unknown entity stays literal
    CHECK(annotation_length("&nbsp;") == 1);
    CHECK(annotation_length("caf\xc3\xa9") == 4);       // code points, not bytes
    CHECK(annotation_length("a<3 b") == 5);             // '<' without a tag is text
    CHECK(annotation_length("<a href=\"q\">link</a>") == 4);
    CHECK(annotation_length("<!-- hidden -->x") == 1);
}

TEST_CASE("strip_headers removes bracketed lines and normalizes whitespace") {
    CHECK(strip_headers("[Verse 1]\nhello world") == "hello world");
    CHECK(strip_headers("hello   world\nagain") == "hello world again");
    CHECK(strip_headers("[Refrain]\n[Outro]") == "");
    CHECK(strip_headers("  [Chorus: Name]  \nla la") == "la la");
    CHECK(strip_headers("not [a header] line") == "not [a header] line");
    CHECK(strip_headers("") == "");
    CHECK(strip_headers("\n\n  \n") == "");
    CHECK(strip_headers("a\n[Bridge]\nb") == "a b");
}

namespace {

// Independent route: enumerate occurrences with an index loop and mark a
// position map, instead of iterator search plus fill.
double coverage_oracle(const std::string& lyrics_raw,
                       const std::vector<std::string>& segments) {
    std::string lyrics = strip_headers(lyrics_raw);
    auto cps = [](const std::string& s) {
        std::vector<char32_t> v = utf8_decode(s);
        return v;
    };
    std::vector<char32_t> L = cps(lyrics);
    std::map<std::size_t, bool> marked;
    long long extra = 0;
    for (const auto& seg_raw : segments) {
        std::vector<char32_t> S = cps(strip_headers(seg_raw));
        if (S.empty()) continue;
        bool any = false;
        std::size_t from = 0;
        while (L.size() >= S.size() && from <= L.size() - S.size()) {
            bool hit = true;
            for (std::size_t k = 0; k < S.size(); ++k)
                if (L[from + k] != S[k]) {
                    hit = false;
                    break;
                }
            if (hit) {
                any = true;
                for (std::size_t k = 0; k < S.size(); ++k) marked[from + k] = true;
                from += S.size();
            } else {
                ++from;
            }
        }
        if (!any) extra += static_cast<long long>(S.size());
    }
    long long a = static_cast<long long>(marked.size()) + extra;
    a = std::min<long long>(a, static_cast<long long>(L.size()));
    return static_cast<double>(a) / static_cast<double>(L.size());
}

} // namespace

TEST_CASE("annotation coverage") {
    SUBCASE("single segment prefix") {
        auto r = annotation_coverage("a b c d", {"a b"});
        CHECK(r.total_chars == 7);
        CHECK(r.covered_chars == 3);
        CHECK(r.coverage == doctest::Approx(3.0 / 7.0));
        CHECK(r.unmatched_segments == 0);
    }
    SUBCASE("segment equal to full lyrics") {
        auto r = annotation_coverage("x y z", {"x y z"});
        CHECK(r.coverage == doctest::Approx(1.0));
    }
    SUBCASE("repeated segment covers every occurrence") {
        auto r = annotation_coverage("x y x y", {"x y"});
        CHECK(r.total_chars == 7);
        CHECK(r.covered_chars == 6);
        CHECK(r.coverage == doctest::Approx(6.0 / 7.0));
    }
    SUBCASE("headers are stripped before measuring") {
        auto r = annotation_coverage("[Hook]\na b c d", {"a b"});
        CHECK(r.total_chars == 7);
        CHECK(r.covered_chars == 3);
    }
    SUBCASE("overlapping segments count positions once") {
        auto r = annotation_coverage("a b c", {"a b", "b c"});
        CHECK(r.covered_chars == 5);
        CHECK(r.coverage == doctest::Approx(1.0));
    }
    SUBCASE("unmatched segment contributes its own length and a diagnostic") {
        auto r = annotation_coverage("alpha beta", {"gamma"});
        CHECK(r.total_chars == 10);
        CHECK(r.covered_chars == 5);
        CHECK(r.unmatched_segments == 1);
        CHECK(r.coverage == doctest::Approx(0.5));
    }
    SUBCASE("coverage is capped at one") {
        auto r = annotation_coverage("ab", {"this segment is much longer than the lyrics"});
        CHECK(r.coverage == doctest::Approx(1.0));
        CHECK(r.covered_chars == r.total_chars);
    }
    SUBCASE("empty lyrics after stripping is an error") {
        CHECK_THROWS_AS(annotation_coverage("[Intro]\n[Outro]", {"x"}), DomainError);
        CHECK_THROWS_AS(annotation_coverage("", {}), DomainError);
    }
    SUBCASE("monotone in segments and matches the position-map oracle") {
        std::mt19937_64 rng(17);
        const char* words[] = {"la", "di", "da", "hum", "oh"};
        for (int round = 0; round < 100; ++round) {
            std::string lyrics;
            int n = 4 + static_cast<int>(rng() % 8);
            for (int k = 0; k < n; ++k) {
                if (k) lyrics += ' ';
                lyrics += words[rng() % 5];
            }
            std::vector<std::string> segs;
            double prev = 0.0;
            for (int s = 0; s < 4; ++s) {
                // random substring of the lyrics, or an alien segment
                if (rng() % 4 == 0) {
                    segs.push_back("zz zz");
                } else {
                    std::size_t a = rng() % lyrics.size();
                    std::size_t len = 1 + rng() % (lyrics.size() - a);
                    segs.push_back(lyrics.substr(a, len));
                }
                auto r = annotation_coverage(lyrics, segs);
                CHECK(r.coverage >= prev - 1e-12);
                CHECK(r.coverage >= 0.0);
                CHECK(r.coverage <= 1.0);
                CHECK(r.coverage == doctest::Approx(coverage_oracle(lyrics, segs)));
                prev = r.coverage;
            }
        }
    }
}

TEST_CASE("tokenizer") {
    auto toks = [](const std::string& s) { return tokenize(s); };
    CHECK(toks("Don't stop") == std::vector<std::string>{"don't", "stop"});
    CHECK(toks("adjustin' the mic") == std::vector<std::string>{"adjustin", "the", "mic"});
    CHECK(toks("rock'n'roll") == std::vector<std::string>{"rock'n'roll"});
    CHECK(toks("'quoted'") == std::vector<std::string>{"quoted"});
    CHECK(toks("well-known") == std::vector<std::string>{"well", "known"});
    CHECK(toks("99 problems") == std::vector<std::string>{"99", "problems"});
    CHECK(toks("don\xe2\x80\x99t") == std::vector<std::string>{"don't"}); // curly apostrophe
    CHECK(toks("") == std::vector<std::string>{});
    CHECK(toks("...") == std::vector<std::string>{});
    CHECK(toks("caf\xc3\xa9 life") == std::vector<std::string>{"caf\xc3\xa9", "life"});
}

namespace {

annodyn::Corpus songs_corpus(const std::vector<std::string>& lyrics) {
    testsupport::CorpusBuilder b;
    for (std::size_t i = 0; i < lyrics.size(); ++i)
        b.song("s" + std::to_string(i), lyrics[i]);
    return b.build();
}

} // namespace

TEST_CASE("idf model") {
    Corpus c = songs_corpus({"alpha beta", "alpha gamma", "alpha delta", "alpha beta epsilon"});
    OriginalityModel m = build_idf(c);
    CHECK(m.n_songs == 4);
    CHECK(m.df.at("alpha") == 4);
    CHECK(m.df.at("beta") == 2);
    CHECK(m.idf.at("beta") == doctest::Approx(std::log(2.0)));
    CHECK(m.idf.at("alpha") == doctest::Approx(0.0));
    CHECK(m.idf.at("epsilon") == doctest::Approx(std::log(4.0)));

    SUBCASE("df counts a song once no matter the repetitions") {
        Corpus r = songs_corpus({"echo echo echo", "echo"});
        OriginalityModel mr = build_idf(r);
        CHECK(mr.df.at("echo") == 2);
        CHECK(mr.idf.at("echo") == doctest::Approx(0.0));
    }
    SUBCASE("headers do not contribute words") {
        Corpus r = songs_corpus({"[Verse 1: Someone]\nhello", "hello"});
        OriginalityModel mr = build_idf(r);
        CHECK(mr.df.count("verse") == 0);
        CHECK(mr.df.count("someone") == 0);
        CHECK(mr.df.at("hello") == 2);
    }
    SUBCASE("empty corpus is an error") {
        CHECK_THROWS_AS(build_idf(Corpus{}), DomainError);
    }
    SUBCASE("brute-force recount on random corpora") {
        std::mt19937_64 rng(23);
        const char* vocab[] = {"one", "two", "three", "four", "five", "six", "seven"};
        for (int round = 0; round < 10; ++round) {
            std::vector<std::string> lyrics;
            int n = 2 + static_cast<int>(rng() % 40);
            for (int s = 0; s < n; ++s) {
                std::string text;
                int w = 1 + static_cast<int>(rng() % 12);
                for (int k = 0; k < w; ++k) {
                    if (k) text += ' ';
                    text += vocab[rng() % std::size(vocab)];
                }
                lyrics.push_back(text);
            }
            Corpus rc = songs_corpus(lyrics);
            OriginalityModel rm = build_idf(rc);
            std::map<std::string, int> df;
            for (const auto& text : lyrics) {
                std::set<std::string> uniq;
                for (const auto& t : tokenize(strip_headers(text))) uniq.insert(t);
                for (const auto& t : uniq) ++df[t];
            }
            CHECK(rm.df.size() == df.size());
            for (const auto& [word, count] : df) {
                CHECK(rm.df.at(word) == count);
                CHECK(count >= 1);
                CHECK(count <= n);
                CHECK(rm.idf.at(word) >= 0.0);
            }
        }
    }
}

TEST_CASE("percentile interpolation matches the exact-rational oracle") {
    // every nondecreasing integer list over {0..4}, lengths 1..6
    for (int len = 1; len <= 6; ++len) {
        std::vector<int> idx(static_cast<std::size_t>(len), 0);
        while (true) {
            std::vector<double> vals(idx.begin(), idx.end());
            for (std::int64_t pct : {60, 75, 90, 0, 100, 50}) {
                double got = percentile_sorted(vals, static_cast<double>(pct));
                double want = oracles::percentile_exact(vals, pct);
                CHECK(got == doctest::Approx(want).epsilon(1e-12));
            }
            int k = len - 1;
            while (k >= 0 && idx[static_cast<std::size_t>(k)] == 4) --k;
            if (k < 0) break;
            int v = ++idx[static_cast<std::size_t>(k)];
            for (int j = k + 1; j < len; ++j) idx[static_cast<std::size_t>(j)] = v;
        }
    }

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> d(-10, 10);
    for (int round = 0; round < 50; ++round) {
        std::vector<double> vals;
        for (int i = 0; i < 1 + static_cast<int>(rng() % 20); ++i) vals.push_back(d(rng));
        std::sort(vals.begin(), vals.end());
        std::int64_t pct = static_cast<std::int64_t>(rng() % 101);
        CHECK(percentile_sorted(vals, static_cast<double>(pct)) ==
              doctest::Approx(oracles::percentile_exact(vals, pct)).epsilon(1e-12));
    }
}

TEST_CASE("originality estimator") {
    OriginalityModel m;
    m.n_songs = 100;
    auto set_word = [&m](const std::string& w, double idf) {
        m.df[w] = 1;
        m.idf[w] = idf;
    };

    SUBCASE("constant idf collapses to that value") {
        set_word("a", 2.5);
        set_word("b", 2.5);
        set_word("c", 2.5);
        CHECK(originality("a b c", m) == doctest::Approx(2.5));
    }
    SUBCASE("hand-interpolated five-value example") {
        set_word("v", 0);
        set_word("w", 1);
        set_word("x", 2);
        set_word("y", 3);
        set_word("z", 4);
        // ranks 2.4, 3.0, 3.6 of {0,1,2,3,4}: p60=2.4, p75=3.0, p90=3.6
        CHECK(originality("v w x y z", m) == doctest::Approx(3.0));
    }
    SUBCASE("duplicate lines do not change the score") {
        set_word("pain", 4.0);
        set_word("gold", 1.5);
        set_word("rain", 2.5);
        std::string text = "pain gold rain";
        double once = originality(text, m);
        CHECK(originality(text + "\n" + text, m) == doctest::Approx(once));
        CHECK(originality("pain pain gold gold rain", m) == doctest::Approx(once));
    }
    SUBCASE("unknown tokens are skipped") {
        set_word("known", 3.0);
        CHECK(originality("known unknown mystery", m) == doctest::Approx(3.0));
        CHECK_THROWS_AS(originality("unknown mystery", m), DomainError);
        CHECK_THROWS_AS(originality("", m), DomainError);
    }
}
