//! Best-effort CPU pinning for real-mode timing workers.
//!
//! Pinning failures never abort a run; the round just records that
//! affinity was not applied. Setting `STENCIL_TUNE_NO_PIN=1` disables all
//! affinity requests.

/// Environment variable that disables affinity requests when set to `1`.
pub const NO_PIN_ENV: &str = "STENCIL_TUNE_NO_PIN";

pub fn pinning_disabled_by_env() -> bool {
    std::env::var(NO_PIN_ENV).map(|v| v == "1").unwrap_or(false)
}

/// Try to pin the calling thread to `cpu`. Returns whether it stuck.
#[cfg(target_os = "linux")]
pub fn pin_current_thread(cpu: usize) -> bool {
    unsafe {
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        libc::CPU_ZERO(&mut set);
        libc::CPU_SET(cpu % libc::CPU_SETSIZE as usize, &mut set);
        libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set) == 0
    }
}

#[cfg(not(target_os = "linux"))]
pub fn pin_current_thread(_cpu: usize) -> bool {
    false
}
