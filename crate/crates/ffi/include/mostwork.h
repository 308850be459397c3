#ifndef MOSTWORK_H
#define MOSTWORK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result of every fallible call.
 */
typedef enum MwStatus {
  MW_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  MW_STATUS_NULL_ARGUMENT = 1,
  /**
   * Text input was not valid UTF-8.
   */
  MW_STATUS_INVALID_UTF8 = 2,
  /**
   * Text input failed to parse; the message names the line and column.
   */
  MW_STATUS_PARSE = 3,
  /**
   * Input parsed but was rejected, or a setting is out of range.
   */
  MW_STATUS_INVALID_INPUT = 4,
  /**
   * Marker geometry could not define a trunk coordinate system.
   */
  MW_STATUS_DEGENERATE = 5,
  /**
   * No frame of the trace matched a posture rule.
   */
  MW_STATUS_NO_POSTURE = 6,
  /**
   * Segment index past the end of the report.
   */
  MW_STATUS_OUT_OF_RANGE = 7,
  /**
   * An internal consistency check failed.
   */
  MW_STATUS_INTERNAL = 8,
  /**
   * The library panicked; the handle involved should be freed.
   */
  MW_STATUS_PANIC = 9,
} MwStatus;

typedef enum MwFormat {
  MW_FORMAT_TABLE = 0,
  MW_FORMAT_CSV = 1,
  MW_FORMAT_JSON = 2,
} MwFormat;

/**
 * Analysis settings, rules, card and transition matrix.
 */
typedef struct MwAnalyzer MwAnalyzer;

/**
 * A finished analysis.
 */
typedef struct MwReport MwReport;

typedef struct MwTotals {
  double standard_time;
  double actual_time;
  double efficiency;
  size_t segment_count;
} MwTotals;

/**
 * Timing of one report row.
 */
typedef struct MwSegment {
  uint64_t start_frame;
  uint64_t end_frame;
  /**
   * Seconds.
   */
  double standard_time;
  /**
   * Seconds.
   */
  double actual_time;
  /**
   * Standard over actual time; 0 for rows priced at zero.
   */
  double efficiency;
  /**
   * Horizontal trunk travel over the segment, meters.
   */
  double action_distance;
  size_t entry_count;
  size_t warning_count;
} MwSegment;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a
 * success. Valid until the next call into the library on this thread.
 */
const char *mw_last_error(void);

/**
 * Library version as a static string.
 */
const char *mw_version(void);

/**
 * Frees a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void mw_string_free(char *s);

/**
 * An analyzer with the built-in rules, card, matrix and default settings.
 */
struct MwAnalyzer *mw_analyzer_new(void);

/**
 * # Safety
 * `analyzer` must come from [`mw_analyzer_new`] and not be freed twice.
 */
void mw_analyzer_free(struct MwAnalyzer *analyzer);

/**
 * Frames a new posture must persist before the change is accepted.
 *
 * # Safety
 * `analyzer` must be a live handle.
 */
enum MwStatus mw_analyzer_set_dwell(struct MwAnalyzer *analyzer, size_t frames);

/**
 * Finger flexion at or above which a finger counts as closed, in (0, 1).
 * Overrides the rule file's threshold.
 *
 * # Safety
 * `analyzer` must be a live handle.
 */
enum MwStatus mw_analyzer_set_gesture_threshold(struct MwAnalyzer *analyzer, double threshold);

/**
 * Step length for action-distance bands and the within-reach distance, meters.
 *
 * # Safety
 * `analyzer` must be a live handle.
 */
enum MwStatus mw_analyzer_set_distance_bands(struct MwAnalyzer *analyzer,
                                             double step_length,
                                             double within_reach);

/**
 * Seconds of "No motion" before a segment is flagged for review.
 *
 * # Safety
 * `analyzer` must be a live handle.
 */
enum MwStatus mw_analyzer_set_idle_threshold(struct MwAnalyzer *analyzer, double seconds);

/**
 * Replaces the posture and hand-action rules with the given rule file text.
 *
 * # Safety
 * `analyzer` must be a live handle; `rules_text` a NUL-terminated string.
 */
enum MwStatus mw_analyzer_load_rules(struct MwAnalyzer *analyzer, const char *rules_text);

/**
 * Replaces the data card with the given card file text.
 *
 * # Safety
 * `analyzer` must be a live handle; `card_text` a NUL-terminated string.
 */
enum MwStatus mw_analyzer_load_card(struct MwAnalyzer *analyzer, const char *card_text);

/**
 * Replaces the posture transition matrix with the given matrix file text.
 *
 * # Safety
 * `analyzer` must be a live handle; `matrix_text` a NUL-terminated string.
 */
enum MwStatus mw_analyzer_load_matrix(struct MwAnalyzer *analyzer, const char *matrix_text);

/**
 * Analyzes a trace. `gestures_text` and `collisions_text` may be null.
 * On success `*out` owns a new report; on failure it is set to null.
 *
 * # Safety
 * `analyzer` must be a live handle, the texts NUL-terminated strings and
 * `out` writable.
 */
enum MwStatus mw_analyze(const struct MwAnalyzer *analyzer,
                         const char *trace_text,
                         const char *gestures_text,
                         const char *collisions_text,
                         struct MwReport **out);

/**
 * # Safety
 * `report` must come from [`mw_analyze`] and not be freed twice.
 */
void mw_report_free(struct MwReport *report);

/**
 * Number of segments, or 0 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
size_t mw_report_segment_count(const struct MwReport *report);

/**
 * # Safety
 * `report` must be a live handle and `out` writable.
 */
enum MwStatus mw_report_totals(const struct MwReport *report, struct MwTotals *out);

/**
 * Timing of segment `index`, counted from 0.
 *
 * # Safety
 * `report` must be a live handle and `out` writable.
 */
enum MwStatus mw_report_segment(const struct MwReport *report, size_t index, struct MwSegment *out);

/**
 * MOST code of segment `index`, such as "BG" or "No motion". Free the
 * result with [`mw_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` writable.
 */
enum MwStatus mw_report_segment_code(const struct MwReport *report, size_t index, char **out);

/**
 * The report as a table, CSV or JSON. Free the result with [`mw_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` writable.
 */
enum MwStatus mw_report_render(const struct MwReport *report, enum MwFormat format, char **out);

/**
 * Standard time in seconds for `len` priced indices.
 *
 * # Safety
 * `indices` must point to `len` readable values (or be null when `len`
 * is 0) and `out` must be writable.
 */
enum MwStatus mw_standard_time(const uint32_t *indices, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOSTWORK_H */
