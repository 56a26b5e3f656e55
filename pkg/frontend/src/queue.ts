/** Serializes async UI work and keeps the first failure for flush(). */
export class TaskQueue {
  private chain: Promise<void> = Promise.resolve();
  private failure: unknown;

  run(action: () => void | Promise<void>): void {
    this.chain = this.chain
      .then(async () => {
        await action();
      })
      .catch((error: unknown) => {
        this.failure = this.failure ?? error;
      });
  }

  async flush(): Promise<void> {
    await this.chain;
    if (this.failure !== undefined) {
      const failure = this.failure;
      this.failure = undefined;
      throw failure instanceof Error ? failure : new Error(String(failure));
    }
  }
}
