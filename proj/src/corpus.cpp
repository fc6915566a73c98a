#include "annodyn/corpus.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace annodyn {
namespace {

using nlohmann::json;

[[noreturn]] void fail_parse(std::size_t line, const std::string& what) {
    throw ParseError("line " + std::to_string(line) + ": " + what);
}

const json& field(const json& rec, const char* name, std::size_t line) {
    auto it = rec.find(name);
    if (it == rec.end()) fail_parse(line, std::string("missing field '") + name + "'");
    return *it;
}

std::string str_field(const json& rec, const char* name, std::size_t line) {
    const json& v = field(rec, name, line);
    if (!v.is_string()) fail_parse(line, std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
}

std::string id_field(const json& rec, const char* name, std::size_t line) {
    std::string s = str_field(rec, name, line);
    if (s.empty()) fail_parse(line, std::string("field '") + name + "' must be a non-empty id");
    return s;
}

std::int64_t int_field(const json& rec, const char* name, std::size_t line) {
    const json& v = field(rec, name, line);
    if (!v.is_number_integer()) fail_parse(line, std::string("field '") + name + "' must be an integer");
    return v.get<std::int64_t>();
}

std::optional<std::int64_t> opt_int_field(const json& rec, const char* name, std::size_t line) {
    auto it = rec.find(name);
    if (it == rec.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) fail_parse(line, std::string("field '") + name + "' must be an integer");
    return it->get<std::int64_t>();
}

template <class T>
void sort_by_id(std::vector<T>& table, std::string T::*id) {
    std::sort(table.begin(), table.end(),
              [id](const T& a, const T& b) { return a.*id < b.*id; });
}

template <class T>
void reject_duplicate_ids(const std::vector<T>& table, std::string T::*id, const char* noun) {
    for (std::size_t i = 1; i < table.size(); ++i) {
        if (table[i].*id == table[i - 1].*id)
            throw IntegrityError(std::string("duplicate ") + noun + " id '" + table[i].*id + "'");
    }
}

template <class T>
std::unordered_map<std::string, std::size_t> build_index(const std::vector<T>& table,
                                                         std::string T::*id) {
    std::unordered_map<std::string, std::size_t> out;
    out.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) out.emplace(table[i].*id, i);
    return out;
}

std::size_t lookup(const std::unordered_map<std::string, std::size_t>& index,
                   const std::string& id, const char* noun) {
    auto it = index.find(id);
    if (it == index.end())
        throw IntegrityError(std::string("unknown ") + noun + " id '" + id + "'");
    return it->second;
}

// ---- binary snapshot ------------------------------------------------------

constexpr char kMagic[8] = {'A', 'N', 'D', 'Y', 'C', 'O', 'R', 'P'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    explicit Writer(std::ostream& os) : os_(os) {}

    void u8(std::uint8_t v) { os_.put(static_cast<char>(v)); }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }

    void str(const std::string& s) {
        u64(s.size());
        os_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

    void opt_i64(const std::optional<std::int64_t>& v) {
        u8(v.has_value() ? 1 : 0);
        if (v) i64(*v);
    }

private:
    std::ostream& os_;
};

class Reader {
public:
    explicit Reader(std::istream& is) : is_(is) {}

    std::uint8_t u8() {
        int c = is_.get();
        if (c == std::char_traits<char>::eof()) throw ParseError("snapshot truncated");
        return static_cast<std::uint8_t>(c);
    }

    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
        return v;
    }

    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }

    std::string str() {
        std::uint64_t n = u64();
        std::string s(n, '\0');
        is_.read(s.data(), static_cast<std::streamsize>(n));
        if (static_cast<std::uint64_t>(is_.gcount()) != n) throw ParseError("snapshot truncated");
        return s;
    }

    std::optional<std::int64_t> opt_i64() {
        if (u8() == 0) return std::nullopt;
        return i64();
    }

private:
    std::istream& is_;
};

} // namespace

std::size_t Corpus::user_of(const std::string& id) const { return lookup(user_index, id, "user"); }
std::size_t Corpus::song_of(const std::string& id) const { return lookup(song_index, id, "song"); }
std::size_t Corpus::annotation_of(const std::string& id) const {
    return lookup(annotation_index, id, "annotation");
}

void Corpus::finalize() {
    for (const User& u : users)
        if (u.iq < 0) throw IntegrityError("user '" + u.user_id + "' has negative iq");
    for (const Song& s : songs)
        if (s.view_count && *s.view_count < 0)
            throw IntegrityError("song '" + s.song_id + "' has negative view_count");
    for (const LyricSegment& s : segments)
        if (s.segment_text.empty())
            throw IntegrityError("segment '" + s.segment_id + "' has empty text");

    sort_by_id(users, &User::user_id);
    sort_by_id(songs, &Song::song_id);
    sort_by_id(segments, &LyricSegment::segment_id);
    sort_by_id(annotations, &Annotation::annotation_id);
    sort_by_id(edits, &Edit::edit_id);

    reject_duplicate_ids(users, &User::user_id, "user");
    reject_duplicate_ids(songs, &Song::song_id, "song");
    reject_duplicate_ids(segments, &LyricSegment::segment_id, "segment");
    reject_duplicate_ids(annotations, &Annotation::annotation_id, "annotation");
    reject_duplicate_ids(edits, &Edit::edit_id, "edit");

    user_index = build_index(users, &User::user_id);
    song_index = build_index(songs, &Song::song_id);
    segment_index = build_index(segments, &LyricSegment::segment_id);
    annotation_index = build_index(annotations, &Annotation::annotation_id);
    edit_index = build_index(edits, &Edit::edit_id);

    song_segments.assign(songs.size(), {});
    for (std::size_t i = 0; i < segments.size(); ++i) {
        auto it = song_index.find(segments[i].song_id);
        if (it == song_index.end())
            throw IntegrityError("segment '" + segments[i].segment_id +
                                 "' references missing song '" + segments[i].song_id + "'");
        song_segments[it->second].push_back(i); // segments are id-sorted already
    }

    song_annotations.assign(songs.size(), {});
    user_annotations.assign(users.size(), {});
    segment_annotation.assign(segments.size(), std::nullopt);
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        const Annotation& a = annotations[i];
        auto seg = segment_index.find(a.segment_id);
        if (seg == segment_index.end())
            throw IntegrityError("annotation '" + a.annotation_id +
                                 "' references missing segment '" + a.segment_id + "'");
        auto author = user_index.find(a.author_id);
        if (author == user_index.end())
            throw IntegrityError("annotation '" + a.annotation_id +
                                 "' references missing user '" + a.author_id + "'");
        if (segment_annotation[seg->second]) {
            const Annotation& prev = annotations[*segment_annotation[seg->second]];
            throw IntegrityError("segment '" + a.segment_id + "' has multiple annotations ('" +
                                 prev.annotation_id + "', '" + a.annotation_id + "')");
        }
        segment_annotation[seg->second] = i;
        auto song = song_index.find(segments[seg->second].song_id);
        song_annotations[song->second].push_back(i);
        user_annotations[author->second].push_back(i);
    }

    annotation_edits.assign(annotations.size(), {});
    user_edits.assign(users.size(), {});
    for (std::size_t i = 0; i < edits.size(); ++i) {
        const Edit& e = edits[i];
        auto ann = annotation_index.find(e.annotation_id);
        if (ann == annotation_index.end())
            throw IntegrityError("edit '" + e.edit_id + "' references missing annotation '" +
                                 e.annotation_id + "'");
        auto author = user_index.find(e.author_id);
        if (author == user_index.end())
            throw IntegrityError("edit '" + e.edit_id + "' references missing user '" +
                                 e.author_id + "'");
        if (e.created_at < annotations[ann->second].created_at)
            throw IntegrityError("edit '" + e.edit_id + "' predates its annotation '" +
                                 e.annotation_id + "'");
        annotation_edits[ann->second].push_back(i);
        user_edits[author->second].push_back(i);
    }

    for (const SocialEdge& edge : social_edges) {
        if (edge.follower_id == edge.followee_id)
            throw IntegrityError("social edge '" + edge.follower_id + "' follows itself");
        if (!user_index.count(edge.follower_id))
            throw IntegrityError("social edge references missing user '" + edge.follower_id + "'");
        if (!user_index.count(edge.followee_id))
            throw IntegrityError("social edge references missing user '" + edge.followee_id + "'");
    }
    std::sort(social_edges.begin(), social_edges.end());
    social_edges.erase(std::unique(social_edges.begin(), social_edges.end()),
                       social_edges.end());

    auto by_time = [this](auto idx_of) {
        return [this, idx_of](std::size_t a, std::size_t b) {
            const auto& ra = idx_of(a);
            const auto& rb = idx_of(b);
            if (ra.created_at != rb.created_at) return ra.created_at < rb.created_at;
            return a < b; // tables are id-sorted, so index order is id order
        };
    };
    auto ann_at = [this](std::size_t i) -> const Annotation& { return annotations[i]; };
    auto edit_at = [this](std::size_t i) -> const Edit& { return edits[i]; };
    for (auto& v : song_annotations) std::sort(v.begin(), v.end(), by_time(ann_at));
    for (auto& v : user_annotations) std::sort(v.begin(), v.end(), by_time(ann_at));
    for (auto& v : annotation_edits) std::sort(v.begin(), v.end(), by_time(edit_at));
    for (auto& v : user_edits) std::sort(v.begin(), v.end(), by_time(edit_at));
}

Corpus ingest_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");

    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;

        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            fail_parse(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!rec.is_object()) fail_parse(line_no, "record must be a JSON object");

        std::string kind = str_field(rec, "kind", line_no);
        if (kind == "user") {
            User u;
            u.user_id = id_field(rec, "user_id", line_no);
            u.iq = int_field(rec, "iq", line_no);
            if (u.iq < 0) fail_parse(line_no, "field 'iq' must be non-negative");
            u.registered_at = opt_int_field(rec, "registered_at", line_no);
            corpus.users.push_back(std::move(u));
        } else if (kind == "song") {
            Song s;
            s.song_id = id_field(rec, "song_id", line_no);
            s.raw_lyrics = str_field(rec, "raw_lyrics", line_no);
            s.view_count = opt_int_field(rec, "view_count", line_no);
            if (s.view_count && *s.view_count < 0)
                fail_parse(line_no, "field 'view_count' must be non-negative");
            corpus.songs.push_back(std::move(s));
        } else if (kind == "segment") {
            LyricSegment s;
            s.segment_id = id_field(rec, "segment_id", line_no);
            s.song_id = id_field(rec, "song_id", line_no);
            s.segment_text = str_field(rec, "segment_text", line_no);
            if (s.segment_text.empty()) fail_parse(line_no, "field 'segment_text' must be non-empty");
            corpus.segments.push_back(std::move(s));
        } else if (kind == "annotation") {
            Annotation a;
            a.annotation_id = id_field(rec, "annotation_id", line_no);
            a.segment_id = id_field(rec, "segment_id", line_no);
            a.author_id = id_field(rec, "author_id", line_no);
            a.created_at = int_field(rec, "created_at", line_no);
            a.body_html = str_field(rec, "body_html", line_no);
            corpus.annotations.push_back(std::move(a));
        } else if (kind == "edit") {
            Edit e;
            e.edit_id = id_field(rec, "edit_id", line_no);
            e.annotation_id = id_field(rec, "annotation_id", line_no);
            e.author_id = id_field(rec, "author_id", line_no);
            e.created_at = int_field(rec, "created_at", line_no);
            e.body_html = str_field(rec, "body_html", line_no);
            corpus.edits.push_back(std::move(e));
        } else if (kind == "social_edge") {
            SocialEdge e;
            e.follower_id = id_field(rec, "follower_id", line_no);
            e.followee_id = id_field(rec, "followee_id", line_no);
            corpus.social_edges.push_back(std::move(e));
        } else {
            fail_parse(line_no, "unknown kind '" + kind + "'");
        }
    }

    corpus.finalize();
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    Writer w(out);
    out.write(kMagic, sizeof kMagic);
    w.u32(kVersion);

    w.u64(corpus.users.size());
    for (const User& u : corpus.users) {
        w.str(u.user_id);
        w.i64(u.iq);
        w.opt_i64(u.registered_at);
    }
    w.u64(corpus.songs.size());
    for (const Song& s : corpus.songs) {
        w.str(s.song_id);
        w.str(s.raw_lyrics);
        w.opt_i64(s.view_count);
    }
    w.u64(corpus.segments.size());
    for (const LyricSegment& s : corpus.segments) {
        w.str(s.segment_id);
        w.str(s.song_id);
        w.str(s.segment_text);
    }
    w.u64(corpus.annotations.size());
    for (const Annotation& a : corpus.annotations) {
        w.str(a.annotation_id);
        w.str(a.segment_id);
        w.str(a.author_id);
        w.i64(a.created_at);
        w.str(a.body_html);
    }
    w.u64(corpus.edits.size());
    for (const Edit& e : corpus.edits) {
        w.str(e.edit_id);
        w.str(e.annotation_id);
        w.str(e.author_id);
        w.i64(e.created_at);
        w.str(e.body_html);
    }
    w.u64(corpus.social_edges.size());
    for (const SocialEdge& e : corpus.social_edges) {
        w.str(e.follower_id);
        w.str(e.followee_id);
    }
    out.flush();
    if (!out) throw Error("write to '" + path + "' failed");
}

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    char magic[8] = {};
    in.read(magic, sizeof magic);
    if (in.gcount() == static_cast<std::streamsize>(sizeof magic) &&
        std::memcmp(magic, kMagic, sizeof magic) == 0) {
        Reader r(in);
        std::uint32_t version = r.u32();
        if (version != kVersion)
            throw ParseError("unsupported snapshot version " + std::to_string(version));

        Corpus corpus;
        for (std::uint64_t n = r.u64(); n > 0; --n) {
            User u;
            u.user_id = r.str();
            u.iq = r.i64();
            u.registered_at = r.opt_i64();
            corpus.users.push_back(std::move(u));
        }
        for (std::uint64_t n = r.u64(); n > 0; --n) {
            Song s;
            s.song_id = r.str();
            s.raw_lyrics = r.str();
            s.view_count = r.opt_i64();
            corpus.songs.push_back(std::move(s));
        }
        for (std::uint64_t n = r.u64(); n > 0; --n) {
            LyricSegment s;
            s.segment_id = r.str();
            s.song_id = r.str();
            s.segment_text = r.str();
            corpus.segments.push_back(std::move(s));
        }
        for (std::uint64_t n = r.u64(); n > 0; --n) {
            Annotation a;
            a.annotation_id = r.str();
            a.segment_id = r.str();
            a.author_id = r.str();
            a.created_at = r.i64();
            a.body_html = r.str();
            corpus.annotations.push_back(std::move(a));
        }
        for (std::uint64_t n = r.u64(); n > 0; --n) {
            Edit e;
            e.edit_id = r.str();
            e.annotation_id = r.str();
            e.author_id = r.str();
            e.created_at = r.i64();
            e.body_html = r.str();
            corpus.edits.push_back(std::move(e));
        }
        for (std::uint64_t n = r.u64(); n > 0; --n) {
            SocialEdge e;
            e.follower_id = r.str();
            e.followee_id = r.str();
            corpus.social_edges.push_back(std::move(e));
        }
        corpus.finalize();
        return corpus;
    }
    return ingest_jsonl(path);
}

std::vector<std::pair<std::int64_t, std::int64_t>> count_distribution(const Corpus& corpus,
                                                                      CountKey key) {
    std::vector<std::int64_t> counts;
    switch (key) {
    case CountKey::annotations_per_user:
        for (const auto& v : corpus.user_annotations) counts.push_back(std::ssize(v));
        break;
    case CountKey::annotations_per_song:
        for (const auto& v : corpus.song_annotations) counts.push_back(std::ssize(v));
        break;
    case CountKey::edits_per_annotation:
        for (const auto& v : corpus.annotation_edits) counts.push_back(std::ssize(v));
        break;
    }
    std::sort(counts.begin(), counts.end());
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    for (std::size_t i = 0; i < counts.size();) {
        std::size_t j = i;
        while (j < counts.size() && counts[j] == counts[i]) ++j;
        out.emplace_back(counts[i], static_cast<std::int64_t>(j - i));
        i = j;
    }
    return out;
}

} // namespace annodyn
