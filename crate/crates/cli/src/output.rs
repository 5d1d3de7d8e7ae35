//! Atomic file output and gnuplot scripts.

use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

/// Writes `contents` to a temporary file in the destination directory, then
/// renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Gnuplot script drawing mean L² error with min/max bars against the
/// truncated-SVD column, log scale.
pub fn approx_plot_script(csv_name: &str, method: &str) -> String {
    format!(
        "# Generated by parasketch approx. Run: gnuplot {stem}.gp\n\
         set datafile separator ','\n\
         set terminal pngcairo size 800,500\n\
         set output '{stem}.png'\n\
         set logscale y\n\
         set format y '10^{{%L}}'\n\
         set xlabel 'approximation rank'\n\
         set ylabel 'L^2 approximation error'\n\
         set key top right\n\
         set grid\n\
         plot '{csv_name}' skip 1 using 1:2:3:4 with yerrorlines lw 2 pt 7 title '{method} (mean, min/max)', \\\n\
         \x20    '{csv_name}' skip 1 using 1:5 with linespoints lw 2 pt 5 dt 2 title 'truncated SVD'\n",
        stem = csv_name.trim_end_matches(".csv"),
    )
}
