use serde::{Deserialize, Serialize};

use crate::config::{ScenarioConfig, ServiceSpec, StayAttributes, DAYS_PER_YEAR};
use crate::des::{RngStream, SimTime};
use crate::dist::{
    sample_bernoulli, sample_exponential, sample_triangular, sample_uniform_int, ExponentialParams,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum YouthKind {
    /// Bed-seeking: asks for a crisis bed before any service.
    Bsy,
    /// Non-bed-seeking: services only.
    Nbsy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgeGroup {
    Y16To20,
    Y21To24,
}

/// Monthly appointment count per service, aligned with `ScenarioConfig::services`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NeedsProfile(pub Vec<u32>);

impl NeedsProfile {
    pub fn count(&self, service: usize) -> u32 {
        self.0[service]
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }
}

/// A youth and every random attribute it will ever need, drawn at arrival.
///
/// Nothing about a youth is sampled after it enters, so two scenarios that
/// share a seed see exactly the same people regardless of capacity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Youth {
    pub id: u64,
    pub kind: YouthKind,
    pub age_group: Option<AgeGroup>,
    pub arrival_time: SimTime,
    pub length_of_stay: f64,
    pub bed_patience: Option<f64>,
    pub service_patience: f64,
    pub needs: NeedsProfile,
    /// Whether this youth leaves outright if it gives up on the bed queue.
    pub exits_on_bed_renege: bool,
    /// Stay length used instead of `length_of_stay` when redrawing after a bed renege.
    pub converted_length_of_stay: f64,
}

/// Attributes other than the needs profile and arrival epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct StayDraw {
    pub age_group: Option<AgeGroup>,
    pub length_of_stay: f64,
    pub bed_patience: Option<f64>,
    pub service_patience: f64,
    pub exits_on_bed_renege: bool,
    pub converted_length_of_stay: f64,
}

/// Draws stay attributes. Always consumes six uniforms, whatever the kind.
pub fn assign_attributes(
    kind: YouthKind,
    stay: &StayAttributes,
    age_16_20_fraction: f64,
    renege_exit_prob: f64,
    rng: &mut RngStream,
) -> StayDraw {
    let u_age = rng.unit();
    let u_los = rng.unit();
    let u_bed = rng.unit();
    let u_svc = rng.unit();
    let u_exit = rng.unit();
    let u_conv = rng.unit();

    let service_patience = sample_triangular(&stay.service_patience, u_svc);
    let converted_length_of_stay = sample_triangular(&stay.los_nbsy, u_conv);
    match kind {
        YouthKind::Bsy => {
            let age = if sample_bernoulli(age_16_20_fraction, u_age) {
                AgeGroup::Y16To20
            } else {
                AgeGroup::Y21To24
            };
            let los = match age {
                AgeGroup::Y16To20 => &stay.los_bsy_16_20,
                AgeGroup::Y21To24 => &stay.los_bsy_21_24,
            };
            StayDraw {
                age_group: Some(age),
                length_of_stay: sample_triangular(los, u_los),
                bed_patience: Some(sample_triangular(&stay.bed_patience, u_bed)),
                service_patience,
                exits_on_bed_renege: sample_bernoulli(renege_exit_prob, u_exit),
                converted_length_of_stay,
            }
        }
        YouthKind::Nbsy => StayDraw {
            age_group: None,
            length_of_stay: sample_triangular(&stay.los_nbsy, u_los),
            bed_patience: None,
            service_patience,
            exits_on_bed_renege: false,
            converted_length_of_stay,
        },
    }
}

/// Per service: ask with `request_prob`, then a uniform count in `appt_min..=appt_max`.
/// Consumes two uniforms per service.
pub fn build_needs_profile(specs: &[ServiceSpec], rng: &mut RngStream) -> NeedsProfile {
    NeedsProfile(
        specs
            .iter()
            .map(|s| {
                let asks = sample_bernoulli(s.request_prob, rng.unit());
                let u_count = rng.unit();
                if asks {
                    sample_uniform_int(s.appt_min, s.appt_max, u_count)
                } else {
                    0
                }
            })
            .collect(),
    )
}

/// Named streams feeding one replication's arrivals.
pub struct ArrivalStreams {
    pub interarrival: RngStream,
    pub attributes: RngStream,
    pub needs: RngStream,
}

impl ArrivalStreams {
    pub fn new(master_seed: u64, replication: u64) -> Self {
        ArrivalStreams {
            interarrival: RngStream::new(master_seed, replication, "arrivals"),
            attributes: RngStream::new(master_seed, replication, "attributes"),
            needs: RngStream::new(master_seed, replication, "needs"),
        }
    }
}

/// Poisson arrivals over `[0, horizon]`, each with a full set of attributes.
pub fn generate_arrivals(
    config: &ScenarioConfig,
    streams: &mut ArrivalStreams,
    horizon: f64,
) -> Vec<Youth> {
    let mut out = Vec::new();
    if config.annual_arrivals <= 0.0 {
        return out;
    }
    let gap = ExponentialParams::new(DAYS_PER_YEAR / config.annual_arrivals)
        .expect("positive arrival rate");
    let mut t = 0.0;
    loop {
        t += sample_exponential(&gap, streams.interarrival.unit_open_low());
        if t > horizon {
            break;
        }
        let kind = if sample_bernoulli(config.bsy_fraction, streams.attributes.unit()) {
            YouthKind::Bsy
        } else {
            YouthKind::Nbsy
        };
        let draw = assign_attributes(
            kind,
            &config.stay,
            config.age_16_20_fraction,
            config.renege_exit_prob,
            &mut streams.attributes,
        );
        let needs = build_needs_profile(&config.services, &mut streams.needs);
        out.push(Youth {
            id: out.len() as u64,
            kind,
            age_group: draw.age_group,
            arrival_time: SimTime::from_days(t),
            length_of_stay: draw.length_of_stay,
            bed_patience: draw.bed_patience,
            service_patience: draw.service_patience,
            needs,
            exits_on_bed_renege: draw.exits_on_bed_renege,
            converted_length_of_stay: draw.converted_length_of_stay,
        });
    }
    out
}
