#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "skelrep/skeleton.hpp"

namespace skelrep {

// Binary sequence format (".skseq"):
//   "SKSQ" | version u16 LE | joint count u8 (=15) | fps f32 LE | frame count u32 LE
//   | label i32 LE (-1 = unlabeled) | subject i32 LE (-1 = unknown)
//   | frame_count * 15 * 3 f32 LE in joint order
inline constexpr uint16_t kSkseqVersion = 1;

void write_skseq(std::ostream& os, const SkeletonSequence& seq);
SkeletonSequence read_skseq(std::istream& is);
void save_skseq(const std::string& path, const SkeletonSequence& seq);
SkeletonSequence load_skseq(const std::string& path);

// Line-delimited JSON alternative: one object per line with fields
// fps, label, subject_id, frames (T x 15 x 3).
std::string to_jsonl_line(const SkeletonSequence& seq);
SkeletonSequence from_jsonl_line(const std::string& line);
std::vector<SkeletonSequence> load_jsonl(const std::string& path);
void save_jsonl(const std::string& path, const std::vector<SkeletonSequence>& seqs);

}  // namespace skelrep
