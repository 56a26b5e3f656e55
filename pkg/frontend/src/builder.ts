/** Interactive plan drafting backed entirely by the service's /menu answers.
 *
 * Every instance or value selector is populated from GET /menu; identifiers
 * the knowledge base has no menu for (plan ids, step ids, categories,
 * processes, role names) are typed.  A draft must round-trip POST /draft-plan
 * cleanly before generation is enabled, and any edit revokes that state.
 */

import { ApiClient, ApiError } from "./api.js";
import { TaskQueue } from "./queue.js";
import type {
  ActionStep,
  Batch,
  Diagnostic,
  DraftRejection,
  FillerAssertion,
  FillerAtom,
  Menu,
  MenuOption,
  PlanDraft,
  PlanList,
  PlanStep,
} from "./types.js";

export type MenuKey =
  | { kind: "device" }
  | { kind: "role"; role: string }
  | { kind: "concept"; concept: string };

function keyString(key: MenuKey): string {
  switch (key.kind) {
    case "device":
      return "device";
    case "role":
      return "role:" + key.role;
    case "concept":
      return "concept:" + key.concept;
  }
}

/** Menu cache; a null entry records a role the service has no menu for. */
export class MenuStore {
  private readonly cache = new Map<string, { key: MenuKey; menu: Menu | null }>();

  constructor(private readonly api: ApiClient) {}

  async get(key: MenuKey): Promise<Menu | null> {
    const id = keyString(key);
    const entry = this.cache.get(id);
    if (entry) return entry.menu;
    const menu = await this.fetch(key);
    this.cache.set(id, { key, menu });
    return menu;
  }

  /** Drop one key so the next read fetches it from the server again. */
  invalidate(key: MenuKey): void {
    this.cache.delete(keyString(key));
  }

  /** Refetch every cached menu; stale options disappear here. */
  async refresh(): Promise<void> {
    const keys = [...this.cache.values()].map((entry) => entry.key);
    this.cache.clear();
    await Promise.all(keys.map((key) => this.get(key)));
  }

  private async fetch(key: MenuKey): Promise<Menu | null> {
    try {
      switch (key.kind) {
        case "device":
          return await this.api.deviceMenu();
        case "role":
          return await this.api.roleMenu(key.role);
        case "concept":
          return await this.api.conceptMenu(key.concept);
      }
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) return null;
      throw error;
    }
  }
}

interface ParticipantRow {
  role: string;
  value: string;
}

interface ActionModel {
  step: "action";
  id: string;
  category: string;
  process: string;
  participants: ParticipantRow[];
  preconditions: FillerAtom[][];
  postconditions: FillerAssertion[];
  refinement: string;
}

interface ConditionalModel {
  step: "conditional";
  condition: FillerAtom[];
  then: StepModel[];
  else: StepModel[];
}

type StepModel = ActionModel | ConditionalModel;

interface DraftModel {
  id: string;
  device: string;
  goal: FillerAtom[];
  locationInfo: string;
  replacementItems: string[];
  steps: StepModel[];
}

function newAtom(): FillerAtom {
  return { atom: "filler", x: "", role: "", y: "" };
}

function newAssertion(): FillerAssertion {
  return { assert: "filler", instance: "", role: "", value: "" };
}

function newAction(): ActionModel {
  return {
    step: "action",
    id: "",
    category: "",
    process: "",
    participants: [],
    preconditions: [],
    postconditions: [],
    refinement: "",
  };
}

function newConditional(): ConditionalModel {
  return { step: "conditional", condition: [], then: [], else: [] };
}

function serializeStep(step: StepModel): PlanStep {
  if (step.step === "conditional") {
    return {
      step: "conditional",
      condition: step.condition.map((atom) => ({ ...atom })),
      then: step.then.map(serializeStep),
      else: step.else.map(serializeStep),
    };
  }
  const participants: Record<string, string> = {};
  for (const row of step.participants) {
    if (row.role !== "") participants[row.role] = row.value;
  }
  const action: ActionStep = {
    step: "action",
    id: step.id,
    category: step.category,
    process: step.process,
    participants,
  };
  const preconditions = step.preconditions.filter((group) => group.length > 0);
  if (preconditions.length > 0) {
    action.preconditions = preconditions.map((group) =>
      group.map((atom) => ({ ...atom })),
    );
  }
  if (step.postconditions.length > 0) {
    action.postconditions = step.postconditions.map((assertion) => ({ ...assertion }));
  }
  if (step.refinement !== "") action.refinement = step.refinement;
  return action;
}

export interface BuilderOptions {
  session?: string;
  languages?: string[];
  onGenerated?: (batch: Batch) => void;
}

const INSTANCE_KEY: MenuKey = { kind: "concept", concept: "THING" };
const SITE_KEY: MenuKey = { kind: "concept", concept: "site" };
const SUBSTANCE_KEY: MenuKey = { kind: "concept", concept: "substance" };

export class PlanBuilder {
  readonly store: MenuStore;
  diagnostics: Diagnostic[] = [];

  private readonly model: DraftModel = {
    id: "",
    device: "",
    goal: [],
    locationInfo: "",
    replacementItems: [],
    steps: [],
  };
  private readonly session: string;
  private readonly languages: string[];
  private readonly onGenerated: ((batch: Batch) => void) | null;
  private validated = false;
  private menus = new Map<string, Menu | null>();
  private applicable: PlanList | null = null;
  private readonly tasks = new TaskQueue();
  private uid = 0;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    options: BuilderOptions = {},
  ) {
    root.classList.add("plan-builder");
    this.store = new MenuStore(api);
    this.session = options.session ?? "s1";
    this.languages = options.languages ?? ["en", "de", "fr"];
    this.onGenerated = options.onGenerated ?? null;
  }

  /** Initial render; resolves once the form is on screen. */
  start(): Promise<void> {
    this.schedule();
    return this.flush();
  }

  /** Settles queued updates; rethrows the first failure, if any. */
  flush(): Promise<void> {
    return this.tasks.flush();
  }

  get canGenerate(): boolean {
    return this.validated;
  }

  serialize(): PlanDraft {
    const draft: PlanDraft = {
      id: this.model.id,
      "target-device": this.model.device,
      goal: this.model.goal.map((atom) => ({ ...atom })),
      steps: this.model.steps.map(serializeStep),
    };
    if (this.model.locationInfo !== "") {
      draft["location-info"] = this.model.locationInfo;
    }
    const items = this.model.replacementItems.filter((item) => item !== "");
    if (items.length > 0) draft["replacement-items"] = items;
    return draft;
  }

  /** Refetch every cached menu and re-render. */
  refreshMenus(): Promise<void> {
    this.schedule(() => this.store.refresh());
    return this.flush();
  }

  /* -- update pipeline ---------------------------------------------- */

  private schedule(action?: () => void | Promise<void>): void {
    this.tasks.run(async () => {
      if (action) await action();
      await this.update();
    });
  }

  /** Model edits revoke the validated state before re-rendering. */
  private edit(mutate: () => void, dependents: MenuKey[] = []): void {
    this.schedule(() => {
      mutate();
      this.validated = false;
      this.diagnostics = [];
      for (const key of dependents) this.store.invalidate(key);
    });
  }

  private async update(): Promise<void> {
    const keys: MenuKey[] = [
      { kind: "device" },
      INSTANCE_KEY,
      SITE_KEY,
      SUBSTANCE_KEY,
      ...[...this.collectRoles()].map((role): MenuKey => ({ kind: "role", role })),
    ];
    const resolved = await Promise.all(keys.map((key) => this.store.get(key)));
    this.menus = new Map(keys.map((key, i) => [keyString(key), resolved[i] ?? null]));
    // the applicable-plan list depends on the chosen device, so it is read
    // from the server on every pass rather than cached
    this.applicable =
      this.model.device === "" ? null : await this.api.plans(this.model.device);
    this.build();
  }

  private collectRoles(): Set<string> {
    const roles = new Set<string>();
    const fromAtoms = (atoms: FillerAtom[]) => {
      for (const atom of atoms) if (atom.role !== "") roles.add(atom.role);
    };
    const fromSteps = (steps: StepModel[]) => {
      for (const step of steps) {
        if (step.step === "conditional") {
          fromAtoms(step.condition);
          fromSteps(step.then);
          fromSteps(step.else);
          continue;
        }
        for (const row of step.participants) {
          if (row.role !== "") roles.add(row.role);
        }
        for (const group of step.preconditions) fromAtoms(group);
        for (const assertion of step.postconditions) {
          if (assertion.role !== "") roles.add(assertion.role);
        }
      }
    };
    fromAtoms(this.model.goal);
    fromSteps(this.model.steps);
    return roles;
  }

  private menuOf(key: MenuKey): Menu | null {
    return this.menus.get(keyString(key)) ?? null;
  }

  /* -- dom ------------------------------------------------------------ */

  private build(): void {
    this.root.textContent = "";
    this.root.appendChild(this.buildHead());
    this.root.appendChild(this.buildGoal());
    const steps = document.createElement("section");
    steps.dataset.section = "steps";
    steps.appendChild(this.buildSteps(this.model.steps, "steps"));
    this.root.appendChild(steps);
    this.root.appendChild(this.buildControls());
  }

  private buildHead(): HTMLElement {
    const head = document.createElement("section");
    head.className = "plan-head";
    head.appendChild(
      this.labeled("plan id", this.textInput("plan-id", this.model.id, (value) => {
        this.edit(() => {
          this.model.id = value;
        });
      })),
    );
    const deviceMenu = this.menuOf({ kind: "device" });
    head.appendChild(
      this.labeled(
        "target device",
        this.menuSelect("target-device", deviceMenu, this.model.device, (value) => {
          this.edit(() => {
            this.model.device = value;
          });
        }),
      ),
    );
    if (this.applicable) {
      const plans = document.createElement("p");
      plans.className = "applicable-plans";
      const ids = this.applicable.plans.map((plan) => plan.id);
      plans.textContent =
        ids.length > 0
          ? `plans for this device: ${ids.join(", ")}`
          : "no plans for this device yet";
      head.appendChild(plans);
    }
    const siteMenu = this.menuOf(SITE_KEY);
    head.appendChild(
      this.labeled(
        "location shown in the document",
        this.menuSelect("location-info", siteMenu, this.model.locationInfo, (value) => {
          this.edit(() => {
            this.model.locationInfo = value;
          });
        }),
      ),
    );
    head.appendChild(this.buildReplacementItems());
    return head;
  }

  private buildReplacementItems(): HTMLElement {
    const section = document.createElement("section");
    section.dataset.section = "replacement-items";
    const title = document.createElement("h3");
    title.textContent = "replacement items";
    section.appendChild(title);
    const menu = this.menuOf(SUBSTANCE_KEY);
    this.model.replacementItems.forEach((item, index) => {
      const row = document.createElement("div");
      row.className = "replacement-row";
      row.appendChild(
        this.menuSelect("replacement-item", menu, item, (value) => {
          this.edit(() => {
            this.model.replacementItems[index] = value;
          });
        }),
      );
      row.appendChild(
        this.button("remove-replacement", "remove", () => {
          this.edit(() => {
            this.model.replacementItems.splice(index, 1);
          });
        }),
      );
      section.appendChild(row);
    });
    section.appendChild(
      this.button("add-replacement", "add replacement item", () => {
        this.edit(() => {
          this.model.replacementItems.push("");
        });
      }),
    );
    return section;
  }

  private buildGoal(): HTMLElement {
    const section = document.createElement("section");
    section.dataset.section = "goal";
    const title = document.createElement("h3");
    title.textContent = "goal";
    section.appendChild(title);
    this.model.goal.forEach((atom, index) => {
      section.appendChild(this.atomRow(atom, this.model.goal, index, `goal.${index}`));
    });
    section.appendChild(
      this.button("add-goal-atom", "add goal condition", () => {
        this.edit(() => {
          this.model.goal.push(newAtom());
        });
      }),
    );
    return section;
  }

  private buildSteps(steps: StepModel[], path: string): HTMLElement {
    const host = document.createElement("div");
    host.className = "steps";
    host.dataset.path = path;
    steps.forEach((step, index) => {
      const stepPath = `${path}.${index}`;
      host.appendChild(
        step.step === "action"
          ? this.actionCard(step, steps, index, stepPath)
          : this.conditionalCard(step, steps, index, stepPath),
      );
    });
    host.appendChild(
      this.button("add-action", "add action", () => {
        this.edit(() => {
          steps.push(newAction());
        });
      }),
    );
    host.appendChild(
      this.button("add-conditional", "add conditional", () => {
        this.edit(() => {
          steps.push(newConditional());
        });
      }),
    );
    return host;
  }

  private actionCard(
    step: ActionModel,
    siblings: StepModel[],
    index: number,
    path: string,
  ): HTMLElement {
    const card = document.createElement("fieldset");
    card.className = "step action";
    card.dataset.path = path;
    const legend = document.createElement("legend");
    legend.textContent = "action";
    card.appendChild(legend);
    card.appendChild(
      this.labeled("step id", this.textInput("step-id", step.id, (value) => {
        this.edit(() => {
          step.id = value;
        });
      })),
    );
    card.appendChild(
      this.labeled("category", this.textInput("category", step.category, (value) => {
        this.edit(() => {
          step.category = value;
        });
      })),
    );
    card.appendChild(
      this.labeled("process", this.textInput("process", step.process, (value) => {
        this.edit(() => {
          step.process = value;
        });
      })),
    );
    card.appendChild(this.participantSection(step, path));
    card.appendChild(this.preconditionSection(step, path));
    card.appendChild(this.postconditionSection(step, path));
    card.appendChild(
      this.labeled(
        "refinement plan",
        this.textInput("refinement", step.refinement, (value) => {
          this.edit(() => {
            step.refinement = value;
          });
        }),
      ),
    );
    card.appendChild(
      this.button("remove-step", "remove step", () => {
        this.edit(() => {
          siblings.splice(index, 1);
        });
      }),
    );
    return card;
  }

  private participantSection(step: ActionModel, path: string): HTMLElement {
    const section = document.createElement("section");
    section.dataset.section = "participants";
    const title = document.createElement("h4");
    title.textContent = "participants";
    section.appendChild(title);
    step.participants.forEach((row, index) => {
      const line = document.createElement("div");
      line.className = "participant-row";
      line.dataset.path = `${path}.participants.${index}`;
      line.appendChild(
        this.textInput("participant-role", row.role, (value) => {
          this.edit(
            () => {
              row.role = value;
              row.value = "";
            },
            value === "" ? [] : [{ kind: "role", role: value }],
          );
        }, "role"),
      );
      line.appendChild(this.valueControl("participant-value", row.role, row.value, (value) => {
        this.edit(() => {
          row.value = value;
        });
      }));
      line.appendChild(
        this.button("remove-participant", "remove", () => {
          this.edit(() => {
            step.participants.splice(index, 1);
          });
        }),
      );
      section.appendChild(line);
    });
    section.appendChild(
      this.button("add-participant", "add participant", () => {
        this.edit(() => {
          step.participants.push({ role: "", value: "" });
        });
      }),
    );
    return section;
  }

  private preconditionSection(step: ActionModel, path: string): HTMLElement {
    const section = document.createElement("section");
    section.dataset.section = "preconditions";
    const title = document.createElement("h4");
    title.textContent = "preconditions";
    section.appendChild(title);
    step.preconditions.forEach((group, groupIndex) => {
      const groupHost = document.createElement("div");
      groupHost.className = "precondition-group";
      groupHost.dataset.path = `${path}.pre.${groupIndex}`;
      group.forEach((atom, atomIndex) => {
        groupHost.appendChild(
          this.atomRow(atom, group, atomIndex, `${path}.pre.${groupIndex}.${atomIndex}`),
        );
      });
      groupHost.appendChild(
        this.button("add-precondition-atom", "add condition", () => {
          this.edit(() => {
            group.push(newAtom());
          });
        }),
      );
      groupHost.appendChild(
        this.button("remove-precondition-group", "remove group", () => {
          this.edit(() => {
            step.preconditions.splice(groupIndex, 1);
          });
        }),
      );
      section.appendChild(groupHost);
    });
    section.appendChild(
      this.button("add-precondition-group", "add precondition group", () => {
        this.edit(() => {
          step.preconditions.push([]);
        });
      }),
    );
    return section;
  }

  private postconditionSection(step: ActionModel, path: string): HTMLElement {
    const section = document.createElement("section");
    section.dataset.section = "postconditions";
    const title = document.createElement("h4");
    title.textContent = "postconditions";
    section.appendChild(title);
    const instanceMenu = this.menuOf(INSTANCE_KEY);
    step.postconditions.forEach((assertion, index) => {
      const row = document.createElement("div");
      row.className = "assert-row";
      row.dataset.path = `${path}.post.${index}`;
      row.appendChild(
        this.menuSelect("assert-instance", instanceMenu, assertion.instance, (value) => {
          this.edit(() => {
            assertion.instance = value;
          });
        }),
      );
      row.appendChild(
        this.textInput("assert-role", assertion.role, (value) => {
          this.edit(
            () => {
              assertion.role = value;
              assertion.value = "";
            },
            value === "" ? [] : [{ kind: "role", role: value }],
          );
        }, "role"),
      );
      row.appendChild(this.valueControl("assert-value", assertion.role, assertion.value, (value) => {
        this.edit(() => {
          assertion.value = value;
        });
      }));
      row.appendChild(
        this.button("remove-assert", "remove", () => {
          this.edit(() => {
            step.postconditions.splice(index, 1);
          });
        }),
      );
      section.appendChild(row);
    });
    section.appendChild(
      this.button("add-postcondition", "add postcondition", () => {
        this.edit(() => {
          step.postconditions.push(newAssertion());
        });
      }),
    );
    return section;
  }

  private conditionalCard(
    step: ConditionalModel,
    siblings: StepModel[],
    index: number,
    path: string,
  ): HTMLElement {
    const card = document.createElement("fieldset");
    card.className = "step conditional";
    card.dataset.path = path;
    const legend = document.createElement("legend");
    legend.textContent = "conditional";
    card.appendChild(legend);

    const condition = document.createElement("section");
    condition.dataset.section = "condition";
    const conditionTitle = document.createElement("h4");
    conditionTitle.textContent = "when";
    condition.appendChild(conditionTitle);
    step.condition.forEach((atom, atomIndex) => {
      condition.appendChild(
        this.atomRow(atom, step.condition, atomIndex, `${path}.condition.${atomIndex}`),
      );
    });
    condition.appendChild(
      this.button("add-condition-atom", "add condition", () => {
        this.edit(() => {
          step.condition.push(newAtom());
        });
      }),
    );
    card.appendChild(condition);

    for (const branch of ["then", "else"] as const) {
      const host = document.createElement("section");
      host.dataset.section = branch;
      const title = document.createElement("h4");
      title.textContent = branch;
      host.appendChild(title);
      host.appendChild(this.buildSteps(step[branch], `${path}.${branch}`));
      card.appendChild(host);
    }

    card.appendChild(
      this.button("remove-step", "remove step", () => {
        this.edit(() => {
          siblings.splice(index, 1);
        });
      }),
    );
    return card;
  }

  private atomRow(
    atom: FillerAtom,
    list: FillerAtom[],
    index: number,
    path: string,
  ): HTMLElement {
    const row = document.createElement("div");
    row.className = "atom-row";
    row.dataset.path = path;
    row.appendChild(
      this.menuSelect("atom-x", this.menuOf(INSTANCE_KEY), atom.x, (value) => {
        this.edit(() => {
          atom.x = value;
        });
      }),
    );
    row.appendChild(
      this.textInput("atom-role", atom.role, (value) => {
        this.edit(
          () => {
            atom.role = value;
            atom.y = "";
          },
          value === "" ? [] : [{ kind: "role", role: value }],
        );
      }, "role"),
    );
    row.appendChild(this.valueControl("atom-y", atom.role, atom.y, (value) => {
      this.edit(() => {
        atom.y = value;
      });
    }));
    row.appendChild(
      this.button("remove-atom", "remove", () => {
        this.edit(() => {
          list.splice(index, 1);
        });
      }),
    );
    return row;
  }

  private buildControls(): HTMLElement {
    const controls = document.createElement("section");
    controls.className = "builder-controls";
    controls.appendChild(
      this.button("refresh-menus", "refresh menus", () => {
        this.schedule(() => this.store.refresh());
      }),
    );
    controls.appendChild(
      this.button("validate", "validate draft", () => {
        this.schedule(() => this.runValidate());
      }),
    );
    const generate = this.button("generate", "generate documents", () => {
      this.schedule(() => this.runGenerate());
    });
    generate.disabled = !this.validated;
    controls.appendChild(generate);

    const diagnostics = document.createElement("div");
    diagnostics.className = "diagnostics";
    if (this.validated) {
      const note = document.createElement("p");
      note.className = "validated-note";
      note.textContent = "draft accepted; generation enabled";
      diagnostics.appendChild(note);
    }
    for (const diagnostic of this.diagnostics) {
      const line = document.createElement("p");
      line.className = "diagnostic " + diagnostic.severity;
      line.textContent = `${diagnostic.severity} ${diagnostic.code}: ${diagnostic.message}`;
      diagnostics.appendChild(line);
    }
    controls.appendChild(diagnostics);
    return controls;
  }

  /* -- form controls ---------------------------------------------------- */

  private labeled(text: string, control: HTMLElement): HTMLLabelElement {
    const label = document.createElement("label");
    const caption = document.createElement("span");
    caption.textContent = text;
    label.appendChild(caption);
    label.appendChild(control);
    return label;
  }

  private textInput(
    name: string,
    value: string,
    onChange: (value: string) => void,
    placeholder?: string,
  ): HTMLInputElement {
    const input = document.createElement("input");
    input.type = "text";
    input.name = name;
    input.value = value;
    if (placeholder) input.placeholder = placeholder;
    input.addEventListener("change", () => onChange(input.value));
    return input;
  }

  private button(name: string, text: string, onClick: () => void): HTMLButtonElement {
    const button = document.createElement("button");
    button.type = "button";
    button.name = name;
    button.textContent = text;
    button.addEventListener("click", onClick);
    return button;
  }

  /** Select fed by a menu; an empty menu renders a hint instead of options. */
  private menuSelect(
    name: string,
    menu: Menu | null,
    value: string,
    onChange: (value: string) => void,
  ): HTMLElement {
    const wrap = document.createElement("span");
    wrap.className = "field";
    const select = document.createElement("select");
    select.name = name;
    const blank = document.createElement("option");
    blank.value = "";
    blank.textContent = "(choose)";
    select.appendChild(blank);
    for (const option of menu?.options ?? []) {
      select.appendChild(this.option(option));
    }
    select.value = value;
    select.addEventListener("change", () => onChange(select.value));
    wrap.appendChild(select);
    if (menu !== null && menu.options.length === 0) {
      wrap.appendChild(this.hint("no options available"));
    }
    return wrap;
  }

  /** Control for a role-dependent value: enum and instance menus become
   * selects, freeform literals an input with suggestions, and roles the
   * service has no menu for fall back to a plain typed input. */
  private valueControl(
    name: string,
    role: string,
    value: string,
    onChange: (value: string) => void,
  ): HTMLElement {
    if (role === "") {
      const wrap = document.createElement("span");
      wrap.className = "field";
      const input = document.createElement("input");
      input.type = "text";
      input.name = name;
      input.disabled = true;
      input.placeholder = "pick a role first";
      wrap.appendChild(input);
      return wrap;
    }
    const menu = this.menuOf({ kind: "role", role });
    if (menu === null) {
      // no menu for this role; the value is a typed identifier
      const wrap = document.createElement("span");
      wrap.className = "field freeform";
      wrap.appendChild(this.textInput(name, value, onChange, "identifier"));
      return wrap;
    }
    if (menu.freeform === true) {
      const wrap = document.createElement("span");
      wrap.className = "field freeform";
      const input = this.textInput(name, value, onChange);
      const listId = `menu-list-${this.uid++}`;
      const datalist = document.createElement("datalist");
      datalist.id = listId;
      for (const option of menu.options) {
        const entry = document.createElement("option");
        entry.value = option.id;
        datalist.appendChild(entry);
      }
      input.setAttribute("list", listId);
      wrap.appendChild(input);
      wrap.appendChild(datalist);
      return wrap;
    }
    return this.menuSelect(name, menu, value, onChange);
  }

  private option(data: MenuOption): HTMLOptionElement {
    const option = document.createElement("option");
    option.value = data.id;
    option.textContent =
      data.concept !== data.id ? `${data.id} (${data.concept})` : data.id;
    return option;
  }

  private hint(text: string): HTMLElement {
    const hint = document.createElement("span");
    hint.className = "hint";
    hint.textContent = text;
    return hint;
  }

  /* -- server round-trips ------------------------------------------------ */

  private async runValidate(): Promise<void> {
    this.validated = false;
    this.diagnostics = [];
    try {
      const accepted = await this.api.draftPlan(this.session, this.serialize(), false);
      this.diagnostics = accepted.diagnostics;
      this.validated = true;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.diagnostics = (error.detail as DraftRejection).diagnostics;
      } else if (error instanceof ApiError) {
        this.diagnostics = [
          {
            severity: "error",
            code: `http-${error.status}`,
            message: typeof error.detail === "string" ? error.detail : "rejected",
          },
        ];
      } else {
        throw error;
      }
    }
  }

  private async runGenerate(): Promise<void> {
    if (!this.validated) return;
    const batch = await this.api.generate({
      plan: this.model.id,
      languages: [...this.languages],
      format: "annotated-json",
      mode: "static",
      session: this.session,
    });
    this.onGenerated?.(batch);
  }
}
