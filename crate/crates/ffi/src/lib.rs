//! C ABI for the deterministic scoring math.
//!
//! Exposes tournament aggregation (sums, normalization, grade mapping,
//! discordance) and Pearson correlation behind opaque handles and error
//! codes, so other languages can bind without reimplementing the arithmetic.
//! The generated header lives at `include/essayjudge.h`.
//!
//! Conventions: functions return [`EjStatus`]; `Ok` is zero. On any other
//! status the thread-local message from [`ej_last_error`] describes the
//! failure. Out-parameters are written only on success. Essays are addressed
//! by index `0..n` in rank-neutral order; a verdict on `(first, second)` with
//! `first < second` awards `value` to `first` and `-value` to `second`.

use essayjudge::aggregate::{
    grade_from_normalized, grade_pairwise, normalize_sum, tournament_sums, GradeProvenance,
};
use essayjudge::analysis::{discordance_pairwise, pearson};
use essayjudge::corpus::{EssayId, GradeBand};
use essayjudge::judge::ComparisonVerdict;
use essayjudge::protocols::VerdictMatrix;
use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CString};
use std::slice;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EjStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument violated a documented precondition.
    Contract = 2,
    /// The tournament is missing verdicts for some pairs.
    Incomplete = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn fail(status: EjStatus, message: impl Into<String>) -> EjStatus {
    let message = message.into();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(message).unwrap_or_default();
    });
    status
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ej_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ej_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// An in-progress round-robin tournament over `n` essays.
pub struct EjTournament {
    n: usize,
    verdicts: Vec<Option<i8>>,
}

impl EjTournament {
    fn pair_index(&self, first: usize, second: usize) -> usize {
        first * self.n - first * (first + 1) / 2 + (second - first - 1)
    }

    fn essay_id(&self, index: usize) -> EssayId {
        EssayId::new(format!("{index:06}"))
    }

    fn matrix(&self) -> Option<VerdictMatrix> {
        let essay_ids: Vec<EssayId> = (0..self.n).map(|i| self.essay_id(i)).collect();
        let mut verdicts = Vec::with_capacity(self.verdicts.len());
        for first in 0..self.n {
            for second in (first + 1)..self.n {
                let value = self.verdicts[self.pair_index(first, second)]?;
                verdicts.push(ComparisonVerdict {
                    pair: (self.essay_id(first), self.essay_id(second)),
                    value,
                    per_criterion_notes: BTreeMap::new(),
                    run_index: 1,
                });
            }
        }
        Some(VerdictMatrix {
            essay_ids,
            verdicts,
        })
    }
}

/// Allocate a tournament over `n_essays` essays (at least 2). Returns null on
/// invalid input. Free with [`ej_tournament_free`].
#[no_mangle]
pub extern "C" fn ej_tournament_new(n_essays: usize) -> *mut EjTournament {
    if n_essays < 2 {
        fail(EjStatus::Contract, "a tournament needs at least 2 essays");
        return std::ptr::null_mut();
    }
    let pairs = n_essays * (n_essays - 1) / 2;
    Box::into_raw(Box::new(EjTournament {
        n: n_essays,
        verdicts: vec![None; pairs],
    }))
}

/// # Safety
/// `tournament` must be a pointer from [`ej_tournament_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ej_tournament_free(tournament: *mut EjTournament) {
    if !tournament.is_null() {
        drop(Box::from_raw(tournament));
    }
}

/// Record the verdict for the pair `(first, second)`: `value` in -2..=2,
/// positive meaning `first` is superior. Requires `first < second < n`.
///
/// # Safety
/// `tournament` must be a live handle from [`ej_tournament_new`].
#[no_mangle]
pub unsafe extern "C" fn ej_tournament_set_verdict(
    tournament: *mut EjTournament,
    first: usize,
    second: usize,
    value: i32,
) -> EjStatus {
    let Some(tournament) = tournament.as_mut() else {
        return fail(EjStatus::NullPointer, "tournament handle is null");
    };
    if first >= second || second >= tournament.n {
        return fail(
            EjStatus::Contract,
            format!(
                "pair ({first}, {second}) invalid for {} essays; need first < second < n",
                tournament.n
            ),
        );
    }
    if !(-2..=2).contains(&value) {
        return fail(
            EjStatus::Contract,
            format!("verdict value {value} outside {{-2,-1,0,+1,+2}}"),
        );
    }
    let index = tournament.pair_index(first, second);
    tournament.verdicts[index] = Some(value as i8);
    EjStatus::Ok
}

/// Whether every pair has a verdict.
///
/// # Safety
/// `tournament` must be a live handle or null (null reports false).
#[no_mangle]
pub unsafe extern "C" fn ej_tournament_is_complete(tournament: *const EjTournament) -> bool {
    tournament
        .as_ref()
        .is_some_and(|t| t.verdicts.iter().all(Option::is_some))
}

/// Write each essay's tournament sum into `out[0..len]`; `len` must equal the
/// essay count.
///
/// # Safety
/// `tournament` must be a live handle; `out` must point to `len` writable i64.
#[no_mangle]
pub unsafe extern "C" fn ej_tournament_sums(
    tournament: *const EjTournament,
    out: *mut i64,
    len: usize,
) -> EjStatus {
    let Some(tournament) = tournament.as_ref() else {
        return fail(EjStatus::NullPointer, "tournament handle is null");
    };
    if out.is_null() {
        return fail(EjStatus::NullPointer, "output buffer is null");
    }
    if len != tournament.n {
        return fail(
            EjStatus::Contract,
            format!("output length {len} does not match essay count {}", tournament.n),
        );
    }
    let Some(matrix) = tournament.matrix() else {
        return fail(EjStatus::Incomplete, "tournament is missing verdicts");
    };
    let sums = match tournament_sums(&matrix) {
        Ok(sums) => sums,
        Err(e) => return fail(EjStatus::Contract, e.to_string()),
    };
    let out = slice::from_raw_parts_mut(out, len);
    for (i, id) in matrix.essay_ids.iter().enumerate() {
        out[i] = sums[id];
    }
    EjStatus::Ok
}

/// Grade every essay of a complete tournament onto `[floor, ceiling]` and
/// write the grades into `out[0..len]`.
///
/// # Safety
/// `tournament` must be a live handle; `out` must point to `len` writable f64.
#[no_mangle]
pub unsafe extern "C" fn ej_tournament_grades(
    tournament: *const EjTournament,
    floor: f64,
    ceiling: f64,
    out: *mut f64,
    len: usize,
) -> EjStatus {
    let Some(tournament) = tournament.as_ref() else {
        return fail(EjStatus::NullPointer, "tournament handle is null");
    };
    if out.is_null() {
        return fail(EjStatus::NullPointer, "output buffer is null");
    }
    if len != tournament.n {
        return fail(
            EjStatus::Contract,
            format!("output length {len} does not match essay count {}", tournament.n),
        );
    }
    let Some(band) = band_for(floor, ceiling) else {
        return fail(
            EjStatus::Contract,
            format!("invalid band: floor {floor} must be below ceiling {ceiling}"),
        );
    };
    let Some(matrix) = tournament.matrix() else {
        return fail(EjStatus::Incomplete, "tournament is missing verdicts");
    };
    match grade_pairwise(&matrix, &band, ffi_provenance()) {
        Ok(sheet) => {
            let out = slice::from_raw_parts_mut(out, len);
            for (i, entry) in sheet.grades.iter().enumerate() {
                out[i] = entry.grade;
            }
            EjStatus::Ok
        }
        Err(e) => fail(EjStatus::Contract, e.to_string()),
    }
}

/// Fraction of verdicts whose sign disagrees with the final grade ordering
/// of a complete tournament.
///
/// # Safety
/// `tournament` must be a live handle; `out_rate` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ej_tournament_discordance(
    tournament: *const EjTournament,
    floor: f64,
    ceiling: f64,
    out_rate: *mut f64,
) -> EjStatus {
    let Some(tournament) = tournament.as_ref() else {
        return fail(EjStatus::NullPointer, "tournament handle is null");
    };
    if out_rate.is_null() {
        return fail(EjStatus::NullPointer, "output pointer is null");
    }
    let Some(band) = band_for(floor, ceiling) else {
        return fail(
            EjStatus::Contract,
            format!("invalid band: floor {floor} must be below ceiling {ceiling}"),
        );
    };
    let Some(matrix) = tournament.matrix() else {
        return fail(EjStatus::Incomplete, "tournament is missing verdicts");
    };
    let sheet = match grade_pairwise(&matrix, &band, ffi_provenance()) {
        Ok(sheet) => sheet,
        Err(e) => return fail(EjStatus::Contract, e.to_string()),
    };
    match discordance_pairwise(&matrix, &sheet) {
        Ok(result) => {
            *out_rate = result.rate;
            EjStatus::Ok
        }
        Err(e) => fail(EjStatus::Contract, e.to_string()),
    }
}

/// Normalize a tournament sum over the attainable range for `n_essays`
/// essays into [0, 1].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ej_normalize_sum(sum: i64, n_essays: usize, out: *mut f64) -> EjStatus {
    if out.is_null() {
        return fail(EjStatus::NullPointer, "output pointer is null");
    }
    match normalize_sum(sum, n_essays) {
        Ok(x) => {
            *out = x;
            EjStatus::Ok
        }
        Err(e) => fail(EjStatus::Contract, e.to_string()),
    }
}

/// Map a normalized score in [0, 1] onto `[floor, ceiling]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ej_grade_from_normalized(
    x: f64,
    floor: f64,
    ceiling: f64,
    out: *mut f64,
) -> EjStatus {
    if out.is_null() {
        return fail(EjStatus::NullPointer, "output pointer is null");
    }
    let Some(band) = band_for(floor, ceiling) else {
        return fail(
            EjStatus::Contract,
            format!("invalid band: floor {floor} must be below ceiling {ceiling}"),
        );
    };
    match grade_from_normalized(x, &band) {
        Ok(grade) => {
            *out = grade;
            EjStatus::Ok
        }
        Err(e) => fail(EjStatus::Contract, e.to_string()),
    }
}

/// Sample Pearson correlation of two series of `len` paired values
/// (`len >= 3`, neither constant).
///
/// # Safety
/// `xs` and `ys` must point to `len` readable f64; `out_r` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ej_pearson(
    xs: *const f64,
    ys: *const f64,
    len: usize,
    out_r: *mut f64,
) -> EjStatus {
    if xs.is_null() || ys.is_null() || out_r.is_null() {
        return fail(EjStatus::NullPointer, "series or output pointer is null");
    }
    let xs = slice::from_raw_parts(xs, len);
    let ys = slice::from_raw_parts(ys, len);
    match pearson(xs, ys, "x", "y") {
        Ok(result) => {
            *out_r = result.r;
            EjStatus::Ok
        }
        Err(e) => fail(EjStatus::Contract, e.to_string()),
    }
}

fn band_for(floor: f64, ceiling: f64) -> Option<GradeBand> {
    let band = GradeBand {
        floor,
        ceiling,
        pass_threshold: floor,
        distinction_threshold: ceiling,
    };
    band.validate().ok().map(|_| band)
}

fn ffi_provenance() -> GradeProvenance {
    GradeProvenance {
        run_id: "ffi".to_string(),
        normalization: "theoretical-range".to_string(),
        repeats: 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    #[test]
    fn version_is_a_c_string() {
        let version = unsafe { CStr::from_ptr(ej_version()) };
        assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn tournament_rejects_degenerate_sizes() {
        assert!(ej_tournament_new(1).is_null());
        assert!(ej_tournament_new(0).is_null());
    }

    #[test]
    fn three_essay_tournament_matches_core_math() {
        unsafe {
            let t = ej_tournament_new(3);
            assert!(!t.is_null());
            assert_eq!(ej_tournament_set_verdict(t, 0, 1, 1), EjStatus::Ok);
            assert_eq!(ej_tournament_set_verdict(t, 0, 2, 2), EjStatus::Ok);
            assert!(!ej_tournament_is_complete(t));
            assert_eq!(ej_tournament_set_verdict(t, 1, 2, -1), EjStatus::Ok);
            assert!(ej_tournament_is_complete(t));

            let mut sums = [0i64; 3];
            assert_eq!(ej_tournament_sums(t, sums.as_mut_ptr(), 3), EjStatus::Ok);
            assert_eq!(sums, [3, -2, -1]);

            let mut grades = [0f64; 3];
            assert_eq!(
                ej_tournament_grades(t, 18.0, 30.0, grades.as_mut_ptr(), 3),
                EjStatus::Ok
            );
            assert_eq!(grades, [28.5, 21.0, 22.5]);

            let mut rate = f64::NAN;
            assert_eq!(
                ej_tournament_discordance(t, 18.0, 30.0, &mut rate),
                EjStatus::Ok
            );
            assert_eq!(rate, 0.0);
            ej_tournament_free(t);
        }
    }

    #[test]
    fn incomplete_tournament_reports_incomplete() {
        unsafe {
            let t = ej_tournament_new(3);
            let mut sums = [0i64; 3];
            assert_eq!(
                ej_tournament_sums(t, sums.as_mut_ptr(), 3),
                EjStatus::Incomplete
            );
            let message = CStr::from_ptr(ej_last_error()).to_str().unwrap();
            assert!(message.contains("missing"));
            ej_tournament_free(t);
        }
    }

    #[test]
    fn bad_arguments_set_the_error_message() {
        unsafe {
            let t = ej_tournament_new(3);
            assert_eq!(ej_tournament_set_verdict(t, 1, 1, 0), EjStatus::Contract);
            assert_eq!(ej_tournament_set_verdict(t, 0, 1, 5), EjStatus::Contract);
            let message = CStr::from_ptr(ej_last_error()).to_str().unwrap();
            assert!(message.contains("outside"));
            assert_eq!(
                ej_tournament_set_verdict(std::ptr::null_mut(), 0, 1, 0),
                EjStatus::NullPointer
            );
            ej_tournament_free(t);
        }
    }

    #[test]
    fn scalar_helpers_match_reference_arithmetic() {
        unsafe {
            let mut x = 0.0;
            assert_eq!(ej_normalize_sum(37, 22, &mut x), EjStatus::Ok);
            let mut grade = 0.0;
            assert_eq!(
                ej_grade_from_normalized(x, 18.0, 30.0, &mut grade),
                EjStatus::Ok
            );
            assert_eq!((grade * 100.0).round() / 100.0, 29.29);
            assert_eq!(ej_normalize_sum(43, 22, &mut x), EjStatus::Contract);
        }
    }

    #[test]
    fn pearson_over_the_abi() {
        unsafe {
            let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
            let ys = [2.0, 1.0, 4.0, 3.0, 6.0];
            let mut r = 0.0;
            assert_eq!(ej_pearson(xs.as_ptr(), ys.as_ptr(), 5, &mut r), EjStatus::Ok);
            assert!(r > 0.5 && r < 1.0);
            let constant = [1.0; 5];
            assert_eq!(
                ej_pearson(constant.as_ptr(), ys.as_ptr(), 5, &mut r),
                EjStatus::Contract
            );
        }
    }
}
