/**
 * Worker screens: register, fetch-and-complete task loop, exams.
 *
 * The UI owns no business rules. Instructions come from the server, the
 * verify screen offers exactly the two judgments the pipeline knows, and
 * grading happens server-side; the only thing measured here is the elapsed
 * time between task render and submit.
 */

import { ApiClient, ApiError, Task, TranslateTask, VerifyTask } from "./api.js";

export interface WorkerAppOptions {
  /** Clock override for tests; defaults to Date.now. */
  now?: () => number;
  /** Languages offered as checkboxes on the register screen. */
  languages?: string[];
  /** Directions offered for exams. */
  directions?: string[];
}

const DEFAULT_LANGUAGES = ["che", "rus", "fuv", "eng"];
const DEFAULT_DIRECTIONS = ["che-rus", "rus-che", "fuv-eng", "eng-fuv"];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export class WorkerApp {
  readonly now: () => number;
  private readonly languages: string[];
  private readonly directions: string[];
  private taskShownAt = 0;
  private currentTask: Task | null = null;
  private countdownTimer: ReturnType<typeof setInterval> | null = null;
  workerName: string | null = null;

  constructor(
    private readonly root: HTMLElement,
    readonly api: ApiClient,
    options: WorkerAppOptions = {},
  ) {
    this.now = options.now ?? (() => Date.now());
    this.languages = options.languages ?? DEFAULT_LANGUAGES;
    this.directions = options.directions ?? DEFAULT_DIRECTIONS;
    this.renderRegister();
  }

  // -- plumbing ---------------------------------------------------------

  private zone(role: string): HTMLElement {
    let node = this.root.querySelector<HTMLElement>(`[data-role="${role}"]`);
    if (!node) {
      node = el("div", { "data-role": role });
      this.root.append(node);
    }
    return node;
  }

  private say(message: string): void {
    this.zone("message").textContent = message;
  }

  /** Errors surface inline and never tear down the current screen. */
  private fail(error: unknown): void {
    const text =
      error instanceof ApiError
        ? `Request failed (${error.status}): ${error.message}`
        : `Request failed: ${String(error)}`;
    this.zone("message").textContent = text;
  }

  private stopCountdown(): void {
    if (this.countdownTimer !== null) {
      clearInterval(this.countdownTimer);
      this.countdownTimer = null;
    }
  }

  private startCountdown(deadline: number): void {
    this.stopCountdown();
    const target = this.zone("countdown");
    const render = () => {
      const left = Math.max(0, Math.round(deadline - this.now() / 1000));
      target.textContent = `${left}s left on this assignment`;
    };
    render();
    this.countdownTimer = setInterval(render, 1000);
  }

  // -- register ---------------------------------------------------------

  private renderRegister(): void {
    this.root.replaceChildren();
    const name = el("input", { "data-role": "name", placeholder: "worker name" });
    const boxes = this.languages.map((lang) =>
      el("label", {}, [
        el("input", { type: "checkbox", "data-lang": lang }),
        ` ${lang}`,
      ]),
    );
    const button = el("button", { "data-action": "register" }, ["Register"]);
    button.addEventListener("click", () => {
      const langs = this.languages.filter(
        (lang) =>
          this.root.querySelector<HTMLInputElement>(`input[data-lang="${lang}"]`)
            ?.checked,
      );
      this.register(name.value.trim(), langs).catch(() => undefined);
    });
    this.root.append(
      el("h2", {}, ["Join the translation crowd"]),
      el("div", { "data-role": "register-form" }, [name, ...boxes, button]),
      el("div", { "data-role": "message" }),
    );
  }

  async register(name: string, langs: string[]): Promise<void> {
    try {
      await this.api.register(name, langs);
    } catch (error) {
      this.fail(error);
      throw error;
    }
    this.workerName = name;
    this.renderHub();
  }

  // -- hub and task loop --------------------------------------------------

  private renderHub(): void {
    this.stopCountdown();
    this.root.replaceChildren();
    const translateButton = el(
      "button",
      { "data-action": "fetch-translate" },
      ["Get translation task"],
    );
    translateButton.addEventListener("click", () => {
      void this.fetchTask("translate");
    });
    const verifyButton = el("button", { "data-action": "fetch-verify" }, [
      "Get verification task",
    ]);
    verifyButton.addEventListener("click", () => {
      void this.fetchTask("verify");
    });
    const examSelect = el("select", { "data-role": "exam-direction" });
    for (const direction of this.directions) {
      examSelect.append(el("option", { value: direction }, [direction]));
    }
    const examButton = el("button", { "data-action": "take-exam" }, [
      "Take qualification exam",
    ]);
    examButton.addEventListener("click", () => {
      void this.startExam(examSelect.value);
    });
    this.root.append(
      el("h2", {}, [`Signed in as ${this.workerName ?? "worker"}`]),
      el("div", { "data-role": "controls" }, [
        translateButton,
        verifyButton,
        examSelect,
        examButton,
      ]),
      el("div", { "data-role": "task" }),
      el("div", { "data-role": "countdown" }),
      el("div", { "data-role": "message" }),
    );
  }

  async fetchTask(kind: "translate" | "verify"): Promise<void> {
    let task: Task | null;
    try {
      task = await this.api.nextTask(kind);
    } catch (error) {
      this.fail(error);
      return;
    }
    if (task === null) {
      this.renderIdle(kind);
      return;
    }
    this.currentTask = task;
    this.taskShownAt = this.now();
    if (task.kind === "translate") {
      this.renderTranslate(task);
    } else {
      this.renderVerify(task);
    }
    this.startCountdown(task.deadline);
  }

  private renderIdle(kind: "translate" | "verify"): void {
    this.stopCountdown();
    this.currentTask = null;
    const zone = this.zone("task");
    zone.replaceChildren();
    const retry = el("button", { "data-action": "retry" }, ["Check again"]);
    retry.addEventListener("click", () => {
      void this.fetchTask(kind);
    });
    zone.append(
      el("p", { "data-role": "idle" }, [
        `No ${kind === "translate" ? "translation" : "verification"} tasks ` +
          "available right now.",
      ]),
      retry,
    );
    this.zone("countdown").textContent = "";
  }

  private elapsedMs(): number {
    return Math.max(1, Math.round(this.now() - this.taskShownAt));
  }

  private renderTranslate(task: TranslateTask): void {
    const zone = this.zone("task");
    zone.replaceChildren();
    const textarea = el("textarea", { "data-role": "translation" });
    const submit = el("button", { "data-action": "submit-translation" }, [
      "Submit translation",
    ]);
    submit.addEventListener("click", () => {
      void this.submitTranslation(textarea.value);
    });
    zone.append(
      el("p", { "data-role": "instruction" }, [task.instruction]),
      el("blockquote", { "data-role": "source" }, [task.source_text]),
      textarea,
      submit,
    );
  }

  async submitTranslation(text: string): Promise<void> {
    const task = this.currentTask;
    if (!task || task.kind !== "translate") {
      return;
    }
    try {
      const outcome = await this.api.submitTranslation(
        task.task_id,
        text,
        this.elapsedMs(),
      );
      this.say(
        outcome.outcome === "queued_for_verification"
          ? "Thanks! Your translation went to verification."
          : `The automatic ${outcome.reason ?? ""} check rejected this ` +
              "submission.",
      );
    } catch (error) {
      this.fail(error);
      return;
    }
    await this.fetchTask("translate");
  }

  private renderVerify(task: VerifyTask): void {
    const zone = this.zone("task");
    zone.replaceChildren();
    const good = el("button", { "data-action": "verdict-good" }, ["Good"]);
    const bad = el("button", { "data-action": "verdict-bad" }, ["Bad"]);
    good.addEventListener("click", () => {
      void this.submitVerdict("good");
    });
    bad.addEventListener("click", () => {
      void this.submitVerdict("bad");
    });
    zone.append(
      el("p", { "data-role": "instruction" }, [
        "Is this translation of the source sentence good or bad?",
      ]),
      el("blockquote", { "data-role": "source" }, [task.source_text]),
      el("blockquote", { "data-role": "candidate" }, [task.candidate_text]),
      el("div", { "data-role": "judgments" }, [good, bad]),
    );
  }

  async submitVerdict(verdict: "good" | "bad"): Promise<void> {
    const task = this.currentTask;
    if (!task || task.kind !== "verify") {
      return;
    }
    try {
      const outcome = await this.api.submitVerdict(
        task.assignment_id,
        verdict,
        this.elapsedMs(),
      );
      this.say(
        outcome.outcome === "finalized"
          ? `Recorded. The translation is now ${outcome.result}.`
          : "Verdict recorded.",
      );
    } catch (error) {
      this.fail(error);
      return;
    }
    await this.fetchTask("verify");
  }

  // -- exam ----------------------------------------------------------------

  async startExam(direction: string): Promise<void> {
    let form;
    try {
      form = await this.api.getExam(direction);
    } catch (error) {
      this.fail(error);
      return;
    }
    this.stopCountdown();
    const zone = this.zone("task");
    zone.replaceChildren();
    if (form.already_passed) {
      this.say(`You already passed the ${direction} exam.`);
    }
    const rows = form.items.map((item, index) =>
      el("li", { "data-role": "exam-item" }, [
        el("span", { "data-role": "exam-src" }, [item.src]),
        el("span", { "data-role": "exam-tgt" }, [item.tgt]),
        el("label", {}, [
          el("input", {
            type: "radio",
            name: `item-${index}`,
            value: "correct",
          }),
          " correct",
        ]),
        el("label", {}, [
          el("input", {
            type: "radio",
            name: `item-${index}`,
            value: "incorrect",
          }),
          " incorrect",
        ]),
      ]),
    );
    const submit = el("button", { "data-action": "submit-exam" }, [
      "Submit answers",
    ]);
    submit.addEventListener("click", () => {
      void this.submitExam(form.direction, form.version, form.items.length);
    });
    zone.append(
      el("p", { "data-role": "instruction" }, [
        `Qualification exam for ${direction}: mark each pair correct or ` +
          "incorrect.",
      ]),
      el("ol", { "data-role": "exam-items" }, rows),
      submit,
    );
  }

  async submitExam(
    direction: string,
    version: string,
    count: number,
  ): Promise<void> {
    const answers: string[] = [];
    for (let index = 0; index < count; index += 1) {
      const picked = this.root.querySelector<HTMLInputElement>(
        `input[name="item-${index}"]:checked`,
      );
      answers.push(picked?.value ?? "incorrect");
    }
    try {
      const grade = await this.api.submitExam(direction, version, answers);
      this.say(
        `Exam score ${grade.score}/10: ` +
          (grade.passed
            ? "passed. Verification tasks are now open to you."
            : "not passed."),
      );
    } catch (error) {
      this.fail(error);
      return;
    }
    this.zone("task").replaceChildren();
  }
}

export function mountWorkerApp(
  root: HTMLElement,
  api: ApiClient,
  options: WorkerAppOptions = {},
): WorkerApp {
  return new WorkerApp(root, api, options);
}
