//! Runs the brute-force soundness checks, then the same checks against a
//! preorder that is too permissive.

use schedreach::verify::{run_campaign, CampaignConfig};

fn main() {
    let sound = run_campaign(&CampaignConfig {
        count: 10,
        ..Default::default()
    });
    println!("idle preorder: {sound}");
    let mutant = run_campaign(&CampaignConfig {
        mutant: true,
        ..Default::default()
    });
    println!("relaxed preorder: {mutant}");
    if let Some(f) = mutant.findings.first() {
        println!("{f}");
    }
}
