#include "natbd/cooccurrence.hpp"

namespace natbd {

CoOccurrenceMatrix build_cooccurrence(const AnnotationSet& set) {
    CoOccurrenceMatrix matrix(set.vocabulary.size());
    for (const auto& rec : set.records) {
        const auto& labels = rec.labels;  // sorted unique, so every i<j pair is unordered
        for (std::size_t a = 0; a < labels.size(); ++a)
            for (std::size_t b = a + 1; b < labels.size(); ++b)
                matrix.add_pair(labels[a], labels[b]);
    }
    for (ClassId c = 0; c < set.vocabulary.size(); ++c)
        matrix.set_class_count(c, set.per_class_image_count[c]);
    return matrix;
}

}  // namespace natbd
