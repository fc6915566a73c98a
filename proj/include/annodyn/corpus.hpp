#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "annodyn/errors.hpp"

namespace annodyn {

struct User {
    std::string user_id;
    std::int64_t iq = 0; // reputation snapshot at collection time, never time-indexed
    std::optional<std::int64_t> registered_at;

    friend bool operator==(const User&, const User&) = default;
};

struct Song {
    std::string song_id;
    std::string raw_lyrics; // may contain bracketed section headers
    std::optional<std::int64_t> view_count; // absent below the platform listing threshold

    friend bool operator==(const Song&, const Song&) = default;
};

struct LyricSegment {
    std::string segment_id;
    std::string song_id;
    std::string segment_text;

    friend bool operator==(const LyricSegment&, const LyricSegment&) = default;
};

struct Annotation {
    std::string annotation_id;
    std::string segment_id;
    std::string author_id;
    std::int64_t created_at = 0; // UTC seconds
    std::string body_html;

    friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct Edit {
    std::string edit_id;
    std::string annotation_id;
    std::string author_id;
    std::int64_t created_at = 0;
    std::string body_html; // full post-edit content

    friend bool operator==(const Edit&, const Edit&) = default;
};

struct SocialEdge {
    std::string follower_id;
    std::string followee_id;

    friend bool operator==(const SocialEdge&, const SocialEdge&) = default;
    friend auto operator<=>(const SocialEdge&, const SocialEdge&) = default;
};

/// Validated, immutable data set. Entity tables are kept in canonical
/// id-sorted order, so two ingests of the same records compare equal no
/// matter the input line order. All derived sequences are time-ordered
/// with id as tiebreak.
class Corpus {
public:
    std::vector<User> users;
    std::vector<Song> songs;
    std::vector<LyricSegment> segments;
    std::vector<Annotation> annotations;
    std::vector<Edit> edits;
    std::vector<SocialEdge> social_edges; // deduplicated, sorted

    // id -> table index
    std::unordered_map<std::string, std::size_t> user_index;
    std::unordered_map<std::string, std::size_t> song_index;
    std::unordered_map<std::string, std::size_t> segment_index;
    std::unordered_map<std::string, std::size_t> annotation_index;
    std::unordered_map<std::string, std::size_t> edit_index;

    // derived sequences, all sorted by (created_at, id)
    std::vector<std::vector<std::size_t>> song_annotations;   // song idx -> annotation idxs
    std::vector<std::vector<std::size_t>> song_segments;      // song idx -> segment idxs (id order)
    std::vector<std::vector<std::size_t>> annotation_edits;   // annotation idx -> edit idxs
    std::vector<std::vector<std::size_t>> user_annotations;   // user idx -> annotation idxs
    std::vector<std::vector<std::size_t>> user_edits;         // user idx -> edit idxs
    std::vector<std::optional<std::size_t>> segment_annotation; // segment idx -> annotation idx

    std::size_t user_of(const std::string& id) const;
    std::size_t song_of(const std::string& id) const;
    std::size_t annotation_of(const std::string& id) const;

    /// Validate referential integrity and rebuild every index. Called by the
    /// ingestion paths; public so hand-assembled corpora in tests go through
    /// the same checks.
    void finalize();

    friend bool operator==(const Corpus& a, const Corpus& b) {
        return a.users == b.users && a.songs == b.songs && a.segments == b.segments &&
               a.annotations == b.annotations && a.edits == b.edits &&
               a.social_edges == b.social_edges;
    }
};

/// Read a JSON-lines file where each line carries a `kind` discriminator in
/// {user, song, segment, annotation, edit, social_edge}. Malformed lines
/// raise ParseError with the line number; dangling references and duplicate
/// ids raise IntegrityError naming the offending ids.
Corpus ingest_jsonl(const std::string& path);

/// Binary snapshot of a validated corpus. Snapshots of equal corpora are
/// byte-identical.
void save_corpus(const Corpus& corpus, const std::string& path);

/// Load either a binary snapshot or a JSONL file (sniffed by magic bytes).
Corpus load_corpus(const std::string& path);

enum class CountKey {
    annotations_per_user,
    annotations_per_song,
    edits_per_annotation,
};

/// Frequency table of per-entity event counts, sorted ascending by value.
/// Entities with zero events are included, so frequencies sum to the number
/// of entities.
std::vector<std::pair<std::int64_t, std::int64_t>> count_distribution(const Corpus& corpus,
                                                                      CountKey key);

} // namespace annodyn
