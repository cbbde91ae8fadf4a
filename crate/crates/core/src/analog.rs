//! Closed-form circuit quantities: the R6/C1 hold network, the BC547 relay
//! driver, resistor dividers and the supply rail.
//!
//! All values are SI: ohms, farads, volts, amperes, seconds, hertz.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalogError {
    #[error("resistance and capacitance must both be positive")]
    NonPositiveRC,
    #[error("threshold {threshold} V is not within (0, {initial}] V")]
    ThresholdAboveInitial { threshold: f64, initial: f64 },
    #[error("invalid bias: need 0 < Vbe < Vcc, Rb > 0 and hFE > 0")]
    InvalidBias,
    #[error("divider has zero total resistance")]
    ZeroTotalResistance,
    #[error("divider resistances must be non-negative")]
    NegativeResistance,
    #[error("frequency and capacitance must both be positive")]
    NonPositiveFC,
    #[error("parameter {name} = {value} is out of range")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// Component values of the lock board.
///
/// Defaults are the as-built part list: 10 kΩ pull-ups, the 470 kΩ / 10 µF
/// hold network, a BC547 with hFE 320 behind 4.7 kΩ, and a 12 V rail from a
/// 240 V / 12 V transformer rated 500 mA.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitParams {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
    pub r5: f64,
    pub r6: f64,
    pub r7: f64,
    pub r8: f64,
    pub r9: f64,
    /// Base resistor of the relay driver.
    pub r10: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub vcc: f64,
    pub vbe: f64,
    pub hfe: f64,
    /// Measured level of a HIGH latch output.
    pub v_high: f64,
    /// Measured level of a LOW latch output.
    pub v_low: f64,
    pub mains_v: f64,
    pub mains_f: f64,
    /// Transformer secondary, RMS.
    pub secondary_v: f64,
    /// Transformer current rating, used as the worst-case load.
    pub load_a: f64,
    pub regulator_out_v: f64,
    /// Minimum input-output headroom of the 78xx regulator.
    pub regulator_dropout_v: f64,
    /// Forward drop of one bridge diode.
    pub diode_drop_v: f64,
}

impl Default for CircuitParams {
    fn default() -> Self {
        CircuitParams {
            r1: 10e3,
            r2: 10e3,
            r3: 10e3,
            r4: 10e3,
            r5: 680e3,
            r6: 470e3,
            r7: 100.0,
            r8: 10e6,
            r9: 10e3,
            r10: 4.7e3,
            c1: 10e-6,
            c2: 470e-6,
            c3: 100e-9,
            c4: 100e-9,
            c5: 100e-6,
            vcc: 12.0,
            vbe: 0.7,
            hfe: 320.0,
            v_high: 11.3,
            v_low: 0.7,
            mains_v: 240.0,
            mains_f: 50.0,
            secondary_v: 12.0,
            load_a: 0.5,
            regulator_out_v: 12.0,
            regulator_dropout_v: 2.0,
            diode_drop_v: 0.7,
        }
    }
}

impl CircuitParams {
    pub fn validate(self) -> Result<Self, AnalogError> {
        let positive = [
            ("r1", self.r1),
            ("r2", self.r2),
            ("r3", self.r3),
            ("r4", self.r4),
            ("r5", self.r5),
            ("r6", self.r6),
            ("r7", self.r7),
            ("r8", self.r8),
            ("r9", self.r9),
            ("r10", self.r10),
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("c4", self.c4),
            ("c5", self.c5),
            ("vcc", self.vcc),
            ("vbe", self.vbe),
            ("hfe", self.hfe),
            ("mains_f", self.mains_f),
        ];
        let non_negative = [
            ("v_high", self.v_high),
            ("v_low", self.v_low),
            ("mains_v", self.mains_v),
            ("secondary_v", self.secondary_v),
            ("load_a", self.load_a),
            ("regulator_out_v", self.regulator_out_v),
            ("regulator_dropout_v", self.regulator_dropout_v),
            ("diode_drop_v", self.diode_drop_v),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(AnalogError::InvalidParameter { name, value });
            }
        }
        for (name, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(AnalogError::InvalidParameter { name, value });
            }
        }
        if self.vbe >= self.vcc {
            return Err(AnalogError::InvalidBias);
        }
        Ok(self)
    }

    /// Relay driver operating point for these parameters.
    pub fn output_stage(&self) -> Result<BjtOperatingPoint, AnalogError> {
        bjt_operating_point(self.vcc, self.vbe, self.r10, self.hfe)
    }
}

/// DC operating point of the relay driver transistor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BjtOperatingPoint {
    /// Drive voltage across the base resistor.
    pub v_q3: f64,
    pub i_b: f64,
    pub i_c: f64,
    /// Always exactly `i_b + i_c`.
    pub i_e: f64,
}

/// τ = R·C.
pub fn time_constant(r: f64, c: f64) -> f64 {
    debug_assert!(r >= 0.0 && c >= 0.0);
    r * c
}

/// First-order RC discharge: `v0 · e^(−t/RC)`.
pub fn discharge_voltage(v0: f64, r: f64, c: f64, t: f64) -> Result<f64, AnalogError> {
    if !(r > 0.0 && c > 0.0) {
        return Err(AnalogError::NonPositiveRC);
    }
    Ok(v0 * (-t / time_constant(r, c)).exp())
}

/// Time for an RC discharge from `v0` to reach `vth`.
pub fn time_to_threshold(v0: f64, vth: f64, r: f64, c: f64) -> Result<f64, AnalogError> {
    if !(r > 0.0 && c > 0.0) {
        return Err(AnalogError::NonPositiveRC);
    }
    if !(vth > 0.0 && vth <= v0) {
        return Err(AnalogError::ThresholdAboveInitial {
            threshold: vth,
            initial: v0,
        });
    }
    Ok(time_constant(r, c) * (v0 / vth).ln())
}

/// Solves the base loop `Vcc − Vbe − V_Q3 = 0`, then `I_B = V_Q3 / R_B`,
/// `I_C = hFE · I_B` and `I_E = I_B + I_C`.
pub fn bjt_operating_point(
    vcc: f64,
    vbe: f64,
    rb: f64,
    hfe: f64,
) -> Result<BjtOperatingPoint, AnalogError> {
    if !(vbe > 0.0 && vbe < vcc && rb > 0.0 && hfe > 0.0) {
        return Err(AnalogError::InvalidBias);
    }
    let v_q3 = vcc - vbe;
    let i_b = v_q3 / rb;
    let i_c = hfe * i_b;
    Ok(BjtOperatingPoint {
        v_q3,
        i_b,
        i_c,
        i_e: i_b + i_c,
    })
}

/// Output of an unloaded divider; `r_bottom` is the leg to ground.
pub fn divider_out(vin: f64, r_top: f64, r_bottom: f64) -> Result<f64, AnalogError> {
    if r_top < 0.0 || r_bottom < 0.0 {
        return Err(AnalogError::NegativeResistance);
    }
    let total = r_top + r_bottom;
    if total <= 0.0 {
        return Err(AnalogError::ZeroTotalResistance);
    }
    Ok(vin * (r_bottom / total))
}

/// Peak-to-peak ripple of a full-wave rectifier into a reservoir capacitor:
/// `ΔV = I / (2·f·C)`.
pub fn ripple_estimate(i_load: f64, f: f64, c: f64) -> Result<f64, AnalogError> {
    if !(f > 0.0 && c > 0.0) {
        return Err(AnalogError::NonPositiveFC);
    }
    Ok(i_load / (2.0 * f * c))
}

/// Hold window of the R6/C1 network, rounded to whole milliseconds.
pub fn derive_hold_time(params: &CircuitParams) -> u64 {
    (time_constant(params.r6, params.c1) * 1000.0).round() as u64
}

/// Ideal 78xx behaviour: the rated output while the input keeps the
/// dropout headroom, otherwise out of regulation.
pub fn regulator_output(v_in: f64, params: &CircuitParams) -> Option<f64> {
    (v_in >= params.regulator_out_v + params.regulator_dropout_v).then_some(params.regulator_out_v)
}

/// Rail figures for the transformer / bridge / reservoir / regulator chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupplyCheck {
    /// Peak secondary voltage minus two bridge diode drops.
    pub rectified_peak_v: f64,
    pub ripple_v: f64,
    /// Lowest point of the rectified rail under `load_a`.
    pub trough_v: f64,
    pub regulates_at_peak: bool,
    pub regulates_at_trough: bool,
}

pub fn supply_check(params: &CircuitParams) -> Result<SupplyCheck, AnalogError> {
    let rectified_peak_v =
        (params.secondary_v * std::f64::consts::SQRT_2 - 2.0 * params.diode_drop_v).max(0.0);
    let ripple_v = ripple_estimate(params.load_a, params.mains_f, params.c2)?;
    let trough_v = (rectified_peak_v - ripple_v).max(0.0);
    Ok(SupplyCheck {
        rectified_peak_v,
        ripple_v,
        trough_v,
        regulates_at_peak: regulator_output(rectified_peak_v, params).is_some(),
        regulates_at_trough: regulator_output(trough_v, params).is_some(),
    })
}
