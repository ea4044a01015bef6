//! Shared vocabulary: paradigms, class labels, conditions, cortical regions
//! and frequency bands.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::DomainError;

/// Experimental paradigm a recording session belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Paradigm {
    ImaginedSpeech,
    VisualImagery,
}

impl Paradigm {
    pub const ALL: [Paradigm; 2] = [Paradigm::ImaginedSpeech, Paradigm::VisualImagery];

    /// Short code used inside marker descriptions (`IS`, `VI`).
    pub fn code(self) -> &'static str {
        match self {
            Paradigm::ImaginedSpeech => "IS",
            Paradigm::VisualImagery => "VI",
        }
    }

    /// Snake-case name used for report file prefixes and config keys.
    pub fn file_stem(self) -> &'static str {
        match self {
            Paradigm::ImaginedSpeech => "imagined_speech",
            Paradigm::VisualImagery => "visual_imagery",
        }
    }
}

impl fmt::Display for Paradigm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.file_stem())
    }
}

impl FromStr for Paradigm {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "is" | "imagined_speech" | "imaginedspeech" | "imagined-speech" => {
                Ok(Paradigm::ImaginedSpeech)
            }
            "vi" | "visual_imagery" | "visualimagery" | "visual-imagery" => {
                Ok(Paradigm::VisualImagery)
            }
            _ => Err(DomainError::UnknownParadigm(s.to_string())),
        }
    }
}

/// One of the twelve word classes, or the resting-state pseudo-class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    Ambulance,
    Clock,
    Hello,
    HelpMe,
    Light,
    Pain,
    Stop,
    ThankYou,
    Toilet,
    Tv,
    Water,
    Yes,
    Rest,
}

impl ClassLabel {
    /// The twelve word classes in table column order.
    pub const WORDS: [ClassLabel; 12] = [
        ClassLabel::Ambulance,
        ClassLabel::Clock,
        ClassLabel::Hello,
        ClassLabel::HelpMe,
        ClassLabel::Light,
        ClassLabel::Pain,
        ClassLabel::Stop,
        ClassLabel::ThankYou,
        ClassLabel::Toilet,
        ClassLabel::Tv,
        ClassLabel::Water,
        ClassLabel::Yes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::Ambulance => "Ambulance",
            ClassLabel::Clock => "Clock",
            ClassLabel::Hello => "Hello",
            ClassLabel::HelpMe => "Help me",
            ClassLabel::Light => "Light",
            ClassLabel::Pain => "Pain",
            ClassLabel::Stop => "Stop",
            ClassLabel::ThankYou => "Thank you",
            ClassLabel::Toilet => "Toilet",
            ClassLabel::Tv => "TV",
            ClassLabel::Water => "Water",
            ClassLabel::Yes => "Yes",
            ClassLabel::Rest => "Rest",
        }
    }

    /// Lower-case file-name form: `Help me` becomes `help_me`.
    pub fn file_stem(self) -> String {
        self.name().to_ascii_lowercase().replace(' ', "_")
    }

    /// All twelve words followed by `Rest`.
    pub fn all() -> [ClassLabel; 13] {
        let mut all = [ClassLabel::Rest; 13];
        all[..12].copy_from_slice(&ClassLabel::WORDS);
        all
    }

    pub fn is_rest(self) -> bool {
        self == ClassLabel::Rest
    }

    /// Condition implied by the class: every word is a task, `Rest` is rest.
    pub fn condition(self) -> Condition {
        if self.is_rest() {
            Condition::Rest
        } else {
            Condition::Task
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassLabel {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
            .collect::<String>()
            .to_ascii_lowercase();
        let label = match key.as_str() {
            "ambulance" => ClassLabel::Ambulance,
            "clock" => ClassLabel::Clock,
            "hello" => ClassLabel::Hello,
            "helpme" => ClassLabel::HelpMe,
            "light" => ClassLabel::Light,
            "pain" => ClassLabel::Pain,
            "stop" => ClassLabel::Stop,
            "thankyou" => ClassLabel::ThankYou,
            "toilet" => ClassLabel::Toilet,
            "tv" => ClassLabel::Tv,
            "water" => ClassLabel::Water,
            "yes" => ClassLabel::Yes,
            "rest" => ClassLabel::Rest,
            _ => return Err(DomainError::UnknownClass(s.to_string())),
        };
        Ok(label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    Task,
    Rest,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Task => "task",
            Condition::Rest => "rest",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Condition {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "task" => Ok(Condition::Task),
            "rest" => Ok(Condition::Rest),
            _ => Err(DomainError::UnknownCondition(s.to_string())),
        }
    }
}

/// Event tag carried in a marker description as `<paradigm>/<class>/<condition>`,
/// for example `IS/Hello/task` or `VI/Rest/rest`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventTag {
    pub paradigm: Paradigm,
    pub class_label: ClassLabel,
    pub condition: Condition,
}

impl EventTag {
    pub fn new(paradigm: Paradigm, class_label: ClassLabel) -> Self {
        EventTag {
            paradigm,
            class_label,
            condition: class_label.condition(),
        }
    }
}

impl fmt::Display for EventTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}",
            self.paradigm.code(),
            self.class_label.name(),
            self.condition.name()
        )
    }
}

impl FromStr for EventTag {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split('/');
        let (Some(p), Some(c), Some(k), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(DomainError::MalformedEventTag(s.to_string()));
        };
        Ok(EventTag {
            paradigm: p.parse()?,
            class_label: c.parse()?,
            condition: k.parse()?,
        })
    }
}

/// Cortical region groups. `All` spans every channel of the recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    /// Broca and Wernicke's areas.
    B,
    /// Visual cortex.
    V,
    /// Auditory cortex.
    A,
    /// Motor cortex.
    M,
    /// Prefrontal cortex.
    P,
    /// Sensory cortex.
    S,
    All,
}

impl Region {
    /// The six specific groups in canonical order.
    pub const SPECIFIC: [Region; 6] = [Region::B, Region::V, Region::A, Region::M, Region::P, Region::S];

    /// Canonical order including the implicit all-channel group.
    pub const ORDER: [Region; 7] = [
        Region::B,
        Region::V,
        Region::A,
        Region::M,
        Region::P,
        Region::S,
        Region::All,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Region::B => "B",
            Region::V => "V",
            Region::A => "A",
            Region::M => "M",
            Region::P => "P",
            Region::S => "S",
            Region::All => "ALL",
        }
    }

    /// The fifteen unordered pairs of distinct specific regions, in report order
    /// (B-V, B-A, ..., P-S).
    pub fn report_pairs() -> Vec<(Region, Region)> {
        let mut pairs = Vec::with_capacity(15);
        for (n, &a) in Region::SPECIFIC.iter().enumerate() {
            for &b in &Region::SPECIFIC[n + 1..] {
                pairs.push((a, b));
            }
        }
        pairs
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Region {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "B" => Ok(Region::B),
            "V" => Ok(Region::V),
            "A" => Ok(Region::A),
            "M" => Ok(Region::M),
            "P" => Ok(Region::P),
            "S" => Ok(Region::S),
            "ALL" => Ok(Region::All),
            _ => Err(DomainError::UnknownRegion(s.to_string())),
        }
    }
}

/// A named pass band in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyBand {
    pub name: String,
    pub low_hz: f64,
    pub high_hz: f64,
}

impl FrequencyBand {
    pub fn new(name: impl Into<String>, low_hz: f64, high_hz: f64) -> Result<Self, DomainError> {
        let band = FrequencyBand {
            name: name.into(),
            low_hz,
            high_hz,
        };
        if !(low_hz.is_finite() && high_hz.is_finite() && 0.0 < low_hz && low_hz < high_hz) {
            return Err(DomainError::InvalidBand {
                name: band.name,
                low_hz,
                high_hz,
            });
        }
        Ok(band)
    }

    /// Checks `high_hz < sampling_rate / 2`.
    pub fn validate_for(&self, sampling_rate: f64) -> Result<(), DomainError> {
        let nyquist = sampling_rate / 2.0;
        if self.high_hz >= nyquist {
            return Err(DomainError::BandAboveNyquist {
                name: self.name.clone(),
                high_hz: self.high_hz,
                nyquist,
            });
        }
        Ok(())
    }

    pub fn contains(&self, hz: f64) -> bool {
        self.low_hz <= hz && hz <= self.high_hz
    }

    /// theta 4-8, alpha 8-13, beta 13-30, gamma 30-45 Hz.
    pub fn defaults() -> Vec<FrequencyBand> {
        vec![
            FrequencyBand { name: "theta".into(), low_hz: 4.0, high_hz: 8.0 },
            FrequencyBand { name: "alpha".into(), low_hz: 8.0, high_hz: 13.0 },
            FrequencyBand { name: "beta".into(), low_hz: 13.0, high_hz: 30.0 },
            FrequencyBand { name: "gamma".into(), low_hz: 30.0, high_hz: 45.0 },
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_pairs_follow_table_order() {
        let names: Vec<String> = Region::report_pairs()
            .iter()
            .map(|(a, b)| format!("{a}-{b}"))
            .collect();
        assert_eq!(
            names,
            [
                "B-V", "B-A", "B-M", "B-P", "B-S", "V-A", "V-M", "V-P", "V-S", "A-M", "A-P", "A-S",
                "M-P", "M-S", "P-S"
            ]
        );
    }

    #[test]
    fn event_tag_round_trips() {
        for paradigm in Paradigm::ALL {
            for class in ClassLabel::WORDS.iter().copied().chain([ClassLabel::Rest]) {
                let tag = EventTag::new(paradigm, class);
                assert_eq!(tag.to_string().parse::<EventTag>().unwrap(), tag);
            }
        }
        assert!("IS/Hello".parse::<EventTag>().is_err());
        assert!("XX/Hello/task".parse::<EventTag>().is_err());
    }

    #[test]
    fn class_names_parse_loosely() {
        assert_eq!("help me".parse::<ClassLabel>().unwrap(), ClassLabel::HelpMe);
        assert_eq!("Thank_you".parse::<ClassLabel>().unwrap(), ClassLabel::ThankYou);
        assert_eq!("tv".parse::<ClassLabel>().unwrap(), ClassLabel::Tv);
        assert!("banana".parse::<ClassLabel>().is_err());
    }

    #[test]
    fn band_validation() {
        assert!(FrequencyBand::new("bad", 8.0, 8.0).is_err());
        assert!(FrequencyBand::new("bad", 0.0, 8.0).is_err());
        let alpha = FrequencyBand::new("alpha", 8.0, 13.0).unwrap();
        assert!(alpha.validate_for(250.0).is_ok());
        assert!(alpha.validate_for(26.0).is_err());
        assert!(alpha.contains(10.0));
    }
}
