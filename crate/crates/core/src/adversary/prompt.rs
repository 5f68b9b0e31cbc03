use crate::adversary::AdversaryRequest;

fn py_float(x: f64) -> String {
    format!("{x:?}")
}

fn py_list(xs: &[f64]) -> String {
    let inner: Vec<String> = xs.iter().map(|x| py_float(*x)).collect();
    format!("[{}]", inner.join(", "))
}

/// Scalar when every component shares the bound, list otherwise.
fn py_bound(xs: &[f64]) -> String {
    match xs {
        [first, rest @ ..] if rest.iter().all(|x| x == first) => py_float(*first),
        _ => py_list(xs),
    }
}

/// Renders the LLM adversary prompt. Reals use Python's `repr` style and the
/// adjacent string pieces are joined without separators, as the original
/// template concatenates them.
pub fn build_llm_prompt(req: &AdversaryRequest) -> String {
    let mut p = String::new();
    p.push_str(
        "This is about a robust reinforcement learning setting; we want you as an adversary policy. \
         If the current reward exceeds the previous reward value, please input some observation noise \
         to disturb the environment and improve the learning algorithm's robustness.",
    );
    p.push_str("The noise should be in this area:");
    p.push_str(&format!("({}, {})", py_bound(&req.region_low), py_bound(&req.region_high)));
    p.push_str(", the current reward:");
    p.push_str(&py_float(req.current_reward));
    p.push_str(", the previous reward is");
    p.push_str(&py_float(req.previous_reward));
    p.push_str("please slightly revise the current environment state values:");
    p.push_str(&py_list(&req.value));
    p.push_str(", just output the revised state with its original format");
    p.push_str("do not output any other things.");
    p
}
