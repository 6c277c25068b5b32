/*
 * qcavity -- conditioned dynamics of a probed optical cavity.
 *
 * C API of the shared library. All state lives behind opaque handles;
 * functions return qc_status codes (matching the CLI exit codes). A
 * human-readable message for the most recent failure on the calling thread
 * is available from qc_last_error().
 */
#ifndef QCAVITY_H
#define QCAVITY_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qc_status {
    QC_OK = 0,
    QC_ERR_CONFIG = 2,  /* unparseable or invalid configuration */
    QC_ERR_NUMERIC = 3, /* integration aborted (diagnostics in qc_last_error) */
    QC_ERR_IO = 4       /* output path not writable */
} qc_status;

typedef struct qc_config qc_config;

const char* qc_version(void);

/* Thread-local message describing the last failure; never NULL. */
const char* qc_last_error(void);

/* --- configuration ----------------------------------------------------- */

/* Empty configuration holding only built-in defaults. */
qc_config* qc_config_new(void);

/* Configuration pre-filled from a named preset; NULL if the name is
 * unknown. */
qc_config* qc_config_from_preset(const char* name);

void qc_config_free(qc_config* cfg);

/* Overlay a key = value config file (sections [params], [run], [output],
 * [feedback]; '#' comments). Later layers win: defaults < preset < file
 * < qc_config_set. */
qc_status qc_config_load_file(qc_config* cfg, const char* path);

qc_status qc_config_set(qc_config* cfg, const char* key, const char* value);

/* Resolved value of a key (default if unset); NULL for unknown keys. The
 * returned pointer remains valid until the next call on this thread. */
const char* qc_config_get(qc_config* cfg, const char* key);

/* --- presets ------------------------------------------------------------ */

int qc_preset_count(void);
const char* qc_preset_name(int index);
const char* qc_preset_brief(int index);

/* --- running ------------------------------------------------------------ */

/* Run the experiment described by cfg. out_dir overrides the config's
 * output directory when non-NULL. Writes CSV files, prints key=value
 * summary lines on stdout and progress on stderr. */
qc_status qc_run(qc_config* cfg, const char* out_dir);

/* Exact vs strong-oscillator homodyne coefficient table at local-oscillator
 * strength mu = |alpha|^2/2 and phase phi. out_path NULL = stdout. */
qc_status qc_tool_upq(double mu, double phi, const char* out_path);

/* Analytic collapse profile (outcome density and conditioned populations)
 * for N atoms at a given r^2 t, equal-spacing regime. */
qc_status qc_tool_fig2(double r2t, int atoms, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif /* QCAVITY_H */
