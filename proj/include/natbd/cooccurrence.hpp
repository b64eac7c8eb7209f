#pragma once

#include <cstdint>
#include <vector>

#include "natbd/annotations.hpp"

namespace natbd {

// Symmetric M x M image-level pair-count matrix with a zero diagonal.
// Single-class frequencies live in class_counts, not on the diagonal.
class CoOccurrenceMatrix {
public:
    CoOccurrenceMatrix() = default;
    explicit CoOccurrenceMatrix(ClassId size) : size_(size), counts_(std::size_t(size) * size, 0), class_counts_(size, 0) {}

    ClassId size() const { return size_; }
    Count count(ClassId i, ClassId j) const { return counts_[std::size_t(i) * size_ + j]; }
    Count class_count(ClassId c) const { return class_counts_[c]; }
    const std::vector<Count>& class_counts() const { return class_counts_; }

    void add_pair(ClassId i, ClassId j) {
        ++counts_[std::size_t(i) * size_ + j];
        ++counts_[std::size_t(j) * size_ + i];
    }
    void set_pair(ClassId i, ClassId j, Count c) {
        counts_[std::size_t(i) * size_ + j] = c;
        counts_[std::size_t(j) * size_ + i] = c;
    }
    void set_class_count(ClassId c, Count n) { class_counts_[c] = n; }

private:
    ClassId size_ = 0;
    std::vector<Count> counts_;
    std::vector<Count> class_counts_;
};

// counts[i][j] = number of images whose label set contains both i and j.
// Each image contributes at most 1 per unordered pair.
CoOccurrenceMatrix build_cooccurrence(const AnnotationSet& set);

}  // namespace natbd
