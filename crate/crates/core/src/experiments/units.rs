//! Unit conversions at the config boundary. Configs speak GHz, MHz, km,
//! dBm, dBi, and dB; everything internal is linear W/Hz/km.

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn ghz_to_hz(ghz: f64) -> f64 {
    ghz * 1e9
}

pub fn mhz_to_hz(mhz: f64) -> f64 {
    mhz * 1e6
}
