//! Clans, tribes and π-tribes on finite instances.
//!
//! The crate has two tiers. Presented categories ([`fincat::FinCat`],
//! [`clan::ClanStructure`]) are explicit tables in which universal properties
//! are decided by exhaustive search. Constructive models
//! ([`models::FinSet`], [`models::FinGpd`]) build pullbacks, path objects and
//! internal products on demand and quantify over a finite working set.
//! Every check is generic over the [`fincat::Category`], [`clan::Clan`],
//! [`tribe::Tribe`] and [`pi::PiClan`] traits, so the same verifier runs on
//! both tiers.

pub mod clan;
pub mod fincat;
pub mod models;
pub mod pi;
pub mod report;
pub mod sample;
pub mod tribe;

pub use report::{Check, Status, VerificationReport};
